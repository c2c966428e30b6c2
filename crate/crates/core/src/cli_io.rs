//! CSV formats, run configuration and the command implementations behind the
//! `scatter-blur` binary.
//!
//! Input point clouds are CSV files with a header row. Columns before the
//! `value` column are coordinates; an `sd` column, when present, holds
//! observation standard deviations. Lines starting with `#` are skipped, so
//! every file this module writes can be read back. Diagnostics number rows
//! by their line in the file, starting at 1.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::assimilation::{sir_weights, Ensemble, EssExperiment, EssRecord};
use crate::blur_op::{BlurConfig, BlurOperator};
use crate::error::{BlurError, Result};
use crate::kernel_approx::{gaussian_bsh, HelmholtzParams, QuadratureParams};
use crate::numeric::fmt_f64;
use crate::rbf_interp::{thin_indices, MeasurementSet, Points};
use crate::spectral_diag::{circle_locations, circulant_eigenvalues, CirculantSpectrum};

/// Mean Earth radius in km used by [`project_degrees`].
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// A numeric CSV table together with the file line of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub lines: Vec<usize>,
}

fn parse_err(row: usize, column: &str, reason: impl Into<String>) -> BlurError {
    BlurError::Parse { row, column: column.to_string(), reason: reason.into() }
}

fn csv_err(e: csv::Error) -> BlurError {
    let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => BlurError::Io(io),
        other => parse_err(row, "", format!("{other:?}")),
    }
}

impl Table {
    /// Parse a table whose cells must all be finite numbers.
    pub fn parse<R: Read>(input: R) -> Result<Self> {
        let mut rdr =
            csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(true).from_reader(input);
        let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        if header.is_empty() || header.iter().all(|h| h.is_empty()) {
            return Err(BlurError::EmptyInput);
        }
        if let Some(h) = header.iter().find(|h| h.is_empty()) {
            return Err(parse_err(1, h, "empty column name"));
        }
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(csv_err)?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            if record.len() == 1 && record[0].is_empty() {
                continue;
            }
            if record.len() != header.len() {
                return Err(parse_err(line, "", format!("expected {} fields, found {}", header.len(), record.len())));
            }
            let row = record
                .iter()
                .zip(&header)
                .map(|(cell, name)| {
                    let v: f64 = cell.parse().map_err(|_| parse_err(line, name, format!("not a number: {cell:?}")))?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(parse_err(line, name, format!("non-finite value {cell:?}")))
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
            lines.push(line);
        }
        if rows.is_empty() {
            return Err(BlurError::EmptyInput);
        }
        Ok(Self { header, rows, lines })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(BufReader::new(File::open(path)?))
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[idx]).collect()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            header: self.header.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            lines: indices.iter().map(|&i| self.lines[i]).collect(),
        }
    }
}

/// A point cloud: coordinate columns, a `value` column and an optional `sd`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloudFile {
    pub table: Table,
    pub dim: usize,
    pub value_col: Option<usize>,
    pub sd_col: Option<usize>,
}

impl PointCloudFile {
    /// Without a `value` column every column other than `sd` is a coordinate.
    pub fn from_table(table: Table) -> Result<Self> {
        let value_col = table.column_index("value");
        let sd_col = table.column_index("sd");
        let dim = match value_col {
            Some(v) => v,
            None => table.header.len() - usize::from(sd_col.is_some()),
        };
        if dim == 0 {
            return Err(parse_err(1, "value", "no coordinate columns before 'value'"));
        }
        if let Some(s) = sd_col {
            if s < dim {
                return Err(parse_err(1, "sd", "'sd' must follow the coordinate columns"));
            }
            if let Some(i) = table.rows.iter().position(|r| !(r[s] > 0.0)) {
                return Err(parse_err(table.lines[i], "sd", "standard deviation must be positive"));
            }
        }
        Ok(Self { table, dim, value_col, sd_col })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_table(Table::read(path)?)
    }

    pub fn len(&self) -> usize {
        self.table.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.rows.is_empty()
    }

    /// Coordinates; duplicate locations are reported by file line.
    pub fn points(&self) -> Result<Points> {
        let coords: Vec<f64> = self.table.rows.iter().flat_map(|r| r[..self.dim].iter().copied()).collect();
        Points::new(self.dim, coords).map_err(|e| match e {
            BlurError::DuplicateLocation { first, second } => {
                BlurError::DuplicateLocation { first: self.table.lines[first], second: self.table.lines[second] }
            }
            other => other,
        })
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let col = self.value_col.ok_or_else(|| parse_err(1, "value", "missing 'value' column"))?;
        Ok(self.table.column(col))
    }

    /// Per-point standard deviations, `default` where there is no `sd` column.
    pub fn sds(&self, default: f64) -> Vec<f64> {
        match self.sd_col {
            Some(c) => self.table.column(c),
            None => vec![default; self.len()],
        }
    }

    pub fn measurement_set(&self) -> Result<MeasurementSet> {
        MeasurementSet::new(self.points()?, self.values()?)
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self { table: self.table.select(indices), ..self.clone() }
    }
}

pub fn read_points(path: &Path) -> Result<MeasurementSet> {
    PointCloudFile::read(path)?.measurement_set()
}

/// Equirectangular projection of `(lon, lat)` degrees to km displacements
/// from `center = (lon, lat)`. Longitude differences wrap to [-180, 180).
pub fn project_degrees(ms: &MeasurementSet, center: (f64, f64)) -> Result<MeasurementSet> {
    MeasurementSet::new(project_points(ms.points(), center)?, ms.values().to_vec())
}

pub fn project_points(points: &Points, center: (f64, f64)) -> Result<Points> {
    if points.dim() != 2 {
        return Err(BlurError::DimensionMismatch { expected: 2, found: points.dim() });
    }
    let (lon0, lat0) = center;
    let valid_lat = |lat: f64| lat.abs() < 90.0;
    if !valid_lat(lat0) || !lon0.is_finite() {
        return Err(BlurError::Domain(format!("invalid projection center ({lon0}, {lat0})")));
    }
    if let Some(i) = points.iter().position(|p| !valid_lat(p[1])) {
        return Err(BlurError::Domain(format!("latitude {} at point {i} outside (-90, 90)", points.point(i)[1])));
    }
    let coslat = lat0.to_radians().cos();
    points.map(|p| {
        let dlon = (p[0] - lon0 + 180.0).rem_euclid(360.0) - 180.0;
        let dlat = p[1] - lat0;
        vec![EARTH_RADIUS_KM * coslat * dlon.to_radians(), EARTH_RADIUS_KM * dlat.to_radians()]
    })
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ell: f64,
    pub beta: f64,
    pub h: f64,
    pub m_minus: u32,
    pub m_plus: u32,
    pub rbf_sd: f64,
    pub normalize: bool,
    /// Greedy thinning distance; 0 keeps every point.
    pub min_sep: f64,
    pub detrend: bool,
    pub seed: u64,
    /// Projection center `(lon, lat)` in degrees.
    pub projection: Option<(f64, f64)>,
    pub residual_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let q = QuadratureParams::default();
        Self {
            ell: 1.0,
            beta: 1.0,
            h: q.h(),
            m_minus: q.m_minus(),
            m_plus: q.m_plus(),
            rbf_sd: 1.0,
            normalize: false,
            min_sep: 0.0,
            detrend: false,
            seed: 0,
            projection: None,
            residual_tol: 1e-8,
        }
    }
}

impl RunConfig {
    pub fn quadrature(&self) -> Result<QuadratureParams> {
        QuadratureParams::new(self.h, self.m_minus, self.m_plus)
    }

    pub fn blur_config(&self) -> Result<BlurConfig> {
        if !(self.residual_tol > 0.0) {
            return Err(BlurError::Domain(format!("residual tolerance must be positive, got {}", self.residual_tol)));
        }
        let cfg = BlurConfig::new(self.ell, self.beta, self.rbf_sd)
            .with_quadrature(self.quadrature()?)
            .normalized(self.normalize)
            .with_residual_tol(self.residual_tol);
        cfg.validate()?;
        Ok(cfg)
    }

    /// One comment line recording every setting.
    pub fn echo(&self, command: &str) -> String {
        let projection = match self.projection {
            Some((lon, lat)) => format!("{lon}:{lat}"),
            None => "none".into(),
        };
        format!(
            "# scatter-blur {} command={command} ell={} beta={} h={} m_minus={} m_plus={} rbf_sd={} normalize={} \
             min_sep={} detrend={} seed={} projection={projection} residual_tol={}",
            env!("CARGO_PKG_VERSION"),
            self.ell,
            self.beta,
            self.h,
            self.m_minus,
            self.m_plus,
            self.rbf_sd,
            self.normalize,
            self.min_sep,
            self.detrend,
            self.seed,
            self.residual_tol,
        )
    }
}

/// Input after projection and thinning, ready for the operator.
struct Prepared {
    file: PointCloudFile,
    ms: MeasurementSet,
}

fn load(cfg: &RunConfig, input: &Path) -> Result<Prepared> {
    let file = PointCloudFile::read(input)?;
    let mut ms = file.measurement_set()?;
    if let Some(center) = cfg.projection {
        ms = project_degrees(&ms, center)?;
    }
    if cfg.min_sep > 0.0 {
        let kept = thin_indices(ms.points(), cfg.min_sep)?;
        if kept.len() < ms.len() {
            log::info!("thinning kept {} of {} points", kept.len(), ms.len());
        }
        return Ok(Prepared { file: file.select(&kept), ms: ms.select(&kept) });
    }
    Ok(Prepared { file, ms })
}

/// Write `echo`, then the header and rows of `base` with `extra` columns appended.
fn write_augmented<W: Write>(out: W, echo: &str, base: &Table, extra: &[(&str, &[f64])]) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{echo}")?;
    let names: Vec<&str> = base.header.iter().map(String::as_str).chain(extra.iter().map(|(n, _)| *n)).collect();
    writeln!(out, "{}", names.join(","))?;
    for (i, row) in base.rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().copied().chain(extra.iter().map(|(_, col)| col[i])).map(fmt_f64).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    Ok(File::create(path)?)
}

/// Blur the `value` column; output is the input columns plus `blurred`.
pub fn cmd_blur(cfg: &RunConfig, input: &Path, output: &Path) -> Result<()> {
    let p = load(cfg, input)?;
    let op = BlurOperator::prepare(cfg.blur_config()?, p.ms.points())?;
    let blurred = op.apply(p.ms.values())?;
    write_augmented(create(output)?, &cfg.echo("blur"), &p.file.table, &[("blurred", &blurred)])
}

/// Scale separation; adds `large`, `small` and `trend_removed` columns.
pub fn cmd_separate(cfg: &RunConfig, input: &Path, output: &Path) -> Result<()> {
    let p = load(cfg, input)?;
    let op = BlurOperator::prepare(cfg.blur_config()?, p.ms.points())?;
    let sep = op.scale_separate(&p.ms, cfg.detrend)?;
    if cfg.detrend {
        log::info!("removed affine trend {:?}", sep.trend);
    }
    write_augmented(
        create(output)?,
        &cfg.echo("separate"),
        &p.file.table,
        &[("large", &sep.large), ("small", &sep.small), ("trend_removed", &sep.deviations)],
    )
}

/// Where the spectrum is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumGeometry {
    Circle { n: usize, spacing: f64 },
    File(PathBuf),
}

pub fn spectrum(cfg: &RunConfig, geometry: &SpectrumGeometry) -> Result<CirculantSpectrum> {
    let points = match geometry {
        SpectrumGeometry::Circle { n, spacing } => circle_locations(*n, *spacing)?,
        SpectrumGeometry::File(path) => PointCloudFile::read(path)?.points()?,
    };
    let op = BlurOperator::prepare(cfg.blur_config()?, &points)?;
    circulant_eigenvalues(&op)
}

pub fn cmd_spectrum(cfg: &RunConfig, geometry: &SpectrumGeometry, output: &Path) -> Result<()> {
    let spec = spectrum(cfg, geometry)?;
    let geo = match geometry {
        SpectrumGeometry::Circle { n, spacing } => format!("circle n={n} spacing={spacing}"),
        SpectrumGeometry::File(path) => format!("file {}", path.display()),
    };
    let mut out = BufWriter::new(create(output)?);
    writeln!(out, "{} geometry={geo}", cfg.echo("spectrum"))?;
    spec.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

/// Source of ensembles for the ESS table.
#[derive(Debug, Clone, PartialEq)]
pub enum EssSource {
    /// Seeded synthetic twin experiment; `ell` is in units of the mean
    /// nearest-neighbor distance.
    Synthetic { n_obs: usize, n_members: usize, trials: usize },
    /// Observations (`x.., value[, sd]`) and a members table with one column
    /// per member and one row per observation, in the same order.
    Files { obs: PathBuf, members: PathBuf },
}

pub fn ess_table(cfg: &RunConfig, source: &EssSource, ells: &[f64]) -> Result<Vec<EssRecord>> {
    if ells.is_empty() {
        return Err(BlurError::Domain("at least one ell value is required".into()));
    }
    if let Some(bad) = ells.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(BlurError::Domain(format!("ell must be non-negative, got {bad}")));
    }
    match source {
        EssSource::Synthetic { n_obs, n_members, trials } => {
            let exp = EssExperiment {
                n_obs: *n_obs,
                n_members: *n_members,
                trials: *trials,
                beta: cfg.beta,
                rbf_sd: cfg.rbf_sd,
                quadrature: cfg.quadrature()?,
                ..EssExperiment::default()
            };
            exp.run(ells, cfg.seed)
        }
        EssSource::Files { obs, members } => {
            let obs_file = PointCloudFile::read(obs)?;
            let members_table = Table::read(members)?;
            if members_table.rows.len() != obs_file.len() {
                return Err(BlurError::DimensionMismatch { expected: obs_file.len(), found: members_table.rows.len() });
            }
            let n_members = members_table.header.len();
            let member_vecs: Vec<Vec<f64>> = (0..n_members).map(|j| members_table.column(j)).collect();
            let mut ms = obs_file.measurement_set()?;
            if let Some(center) = cfg.projection {
                ms = project_degrees(&ms, center)?;
            }
            let ens = Ensemble::new(member_vecs, ms.values().to_vec(), obs_file.sds(1.0))?;
            ells.iter()
                .map(|&ell| {
                    let bc = RunConfig { ell, ..cfg.clone() }.blur_config()?;
                    let op = BlurOperator::prepare(bc, ms.points())?;
                    let w = sir_weights(&ens, &op)?;
                    Ok(EssRecord { ell, trial: 0, ess: w.ess })
                })
                .collect()
        }
    }
}

pub fn write_ess_csv<W: Write>(out: W, echo: &str, records: &[EssRecord]) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{echo}")?;
    writeln!(out, "ell,trial,ess")?;
    for r in records {
        writeln!(out, "{},{},{}", fmt_f64(r.ell), r.trial, fmt_f64(r.ess))?;
    }
    out.flush()?;
    Ok(())
}

pub fn cmd_ess(cfg: &RunConfig, source: &EssSource, ells: &[f64], output: &Path) -> Result<()> {
    let records = ess_table(cfg, source, ells)?;
    let src = match source {
        EssSource::Synthetic { n_obs, n_members, trials } => {
            format!("synthetic n_obs={n_obs} members={n_members} trials={trials}")
        }
        EssSource::Files { obs, members } => format!("files obs={} members={}", obs.display(), members.display()),
    };
    let ell_list: Vec<String> = ells.iter().map(|l| l.to_string()).collect();
    let echo = format!("{} source={src} ells={}", cfg.echo("ess"), ell_list.join(":"));
    write_ess_csv(create(output)?, &echo, &records)
}

/// Write the Gaussian mixture for `(ell, beta)` in dimension `dim`, and
/// optionally its Fourier-space error profile on `[0, k_max]`.
pub fn cmd_kernel(cfg: &RunConfig, dim: usize, output: &Path, profile: Option<(&Path, f64, usize)>) -> Result<()> {
    let mix = gaussian_bsh(HelmholtzParams::new(cfg.ell, cfg.beta)?, cfg.quadrature()?, dim)?;
    let mut out = BufWriter::new(create(output)?);
    mix.write_csv(&mut out)?;
    out.flush()?;
    if let Some((path, k_max, n)) = profile {
        let samples = mix.relative_error_profile(k_max, n)?;
        let mut out = BufWriter::new(create(path)?);
        writeln!(out, "{}", cfg.echo("kernel"))?;
        writeln!(out, "k,approx,exact,signed_rel_err")?;
        for s in samples {
            writeln!(out, "{},{},{},{}", fmt_f64(s.k), fmt_f64(s.approx), fmt_f64(s.exact), fmt_f64(s.signed_rel_err))?;
        }
        out.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> Result<Table> {
        Table::parse(text.as_bytes())
    }

    #[test]
    fn single_row_cloud() {
        let f = PointCloudFile::from_table(table("x1,x2,value\n0,0,7\n").unwrap()).unwrap();
        let ms = f.measurement_set().unwrap();
        assert_eq!((ms.len(), ms.dim()), (1, 2));
        assert_eq!(ms.values(), &[7.0]);
    }

    #[test]
    fn duplicate_rows_are_named_by_line() {
        let f = PointCloudFile::from_table(table("# note\nx1,value\n0,1\n2,3\n0,4\n").unwrap()).unwrap();
        match f.measurement_set() {
            Err(BlurError::DuplicateLocation { first, second }) => assert_eq!((first, second), (3, 5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nan_cell_cites_row() {
        match table("x1,value\n0,1\n1,nan\n") {
            Err(BlurError::Parse { row, column, .. }) => assert_eq!((row, column.as_str()), (3, "value")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(table("x1,value\n0,abc\n"), Err(BlurError::Parse { row: 2, .. })));
        assert!(matches!(table("x1,value\n0,1,2\n"), Err(BlurError::Parse { row: 2, .. })));
        assert!(matches!(table("x1,value\n"), Err(BlurError::EmptyInput)));
        assert!(matches!(table(""), Err(BlurError::EmptyInput)));
    }

    #[test]
    fn sd_column_is_not_a_coordinate() {
        let f = PointCloudFile::from_table(table("lon,lat,value,sd\n1,2,3,0.5\n").unwrap()).unwrap();
        assert_eq!(f.dim, 2);
        assert_eq!(f.sds(1.0), vec![0.5]);
        let bad = PointCloudFile::from_table(table("x,value,sd\n1,2,0\n").unwrap());
        assert!(matches!(bad, Err(BlurError::Parse { .. })));
        let geom = PointCloudFile::from_table(table("x,y\n1,2\n").unwrap()).unwrap();
        assert_eq!(geom.dim, 2);
        assert!(geom.values().is_err());
    }

    fn projected(lon: f64, lat: f64) -> Vec<f64> {
        let p = Points::new(2, vec![lon, lat]).unwrap();
        project_points(&p, (-35.0, 50.0)).unwrap().point(0).to_vec()
    }

    #[test]
    fn projection_distances() {
        assert_eq!(projected(-35.0, 50.0), vec![0.0, 0.0]);
        let north = projected(-35.0, 51.0);
        assert_eq!(north[0], 0.0);
        assert!((north[1] - 111.19492664455873).abs() < 1e-9);
        let east = projected(-34.0, 50.0);
        assert!((east[0] - 71.474721107126).abs() < 1e-9);
        assert!(east[1].abs() < 1e-12);
        // across the antimeridian
        let p = Points::new(2, vec![179.5, 0.0]).unwrap();
        let x = project_points(&p, (-179.5, 0.0)).unwrap().point(0)[0];
        assert!((x + 111.19492664455873).abs() < 1e-9);
    }

    #[test]
    fn projection_rejects_poles() {
        let p = Points::new(2, vec![0.0, 90.0]).unwrap();
        assert!(matches!(project_points(&p, (0.0, 0.0)), Err(BlurError::Domain(_))));
        let q = Points::new(2, vec![0.0, 10.0]).unwrap();
        assert!(matches!(project_points(&q, (0.0, -90.0)), Err(BlurError::Domain(_))));
        let r = Points::new(1, vec![0.0]).unwrap();
        assert!(matches!(project_points(&r, (0.0, 0.0)), Err(BlurError::DimensionMismatch { .. })));
    }

    #[test]
    fn echo_is_a_single_comment_line() {
        let e = RunConfig::default().echo("blur");
        assert!(e.starts_with("# scatter-blur"));
        assert!(!e.contains('\n'));
        for key in ["ell=1", "beta=1", "h=0.2", "m_minus=32", "m_plus=28", "seed=0", "projection=none"] {
            assert!(e.contains(key), "{key} missing from {e}");
        }
    }

    #[test]
    fn augmented_output_round_trips() {
        let t = table("x1,value\n0.1,0.3333333333333333\n2.5e-300,-7\n").unwrap();
        let extra = [1.0 / 3.0, f64::MIN_POSITIVE];
        let mut buf = Vec::new();
        write_augmented(&mut buf, "# test", &t, &[("blurred", &extra)]).unwrap();
        let back = Table::parse(buf.as_slice()).unwrap();
        assert_eq!(back.header, vec!["x1", "value", "blurred"]);
        for (row, orig) in back.rows.iter().zip(&t.rows) {
            assert_eq!(row[0].to_bits(), orig[0].to_bits());
            assert_eq!(row[1].to_bits(), orig[1].to_bits());
        }
        assert_eq!(back.column(2), extra.to_vec());
    }

    #[test]
    fn config_validation() {
        let bad = RunConfig { residual_tol: 0.0, ..RunConfig::default() };
        assert!(bad.blur_config().is_err());
        let bad = RunConfig { beta: -1.0, ..RunConfig::default() };
        assert!(bad.blur_config().is_err());
        let ok = RunConfig { ell: 0.0, ..RunConfig::default() };
        assert!(ok.blur_config().unwrap().is_identity());
    }
}
