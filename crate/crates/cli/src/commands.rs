use std::fs::File;

use cfkit::basis::{monomial_label, OrderedBasis};
use cfkit::christoffel::{
    build_cf, orthonormal_chol, orthonormal_det, score_points, MAX_DET_BASIS,
};
use cfkit::disintegration::{
    asymptotic_sweep_from, conditional_sos, conjecture_probe_from, decay_sweep_from,
    factorization_residual, Disintegrator, MeasureSource,
};
use cfkit::linalg::rows;
use cfkit::maxdet::{maxdet_hankel, weighted_maxdet, UnivariateSos, WeightedCone};
use cfkit::moments::{moment_matrix_with_jitter, MeasureSpec, MomentSequence, DEFAULT_QUAD_ORDER};
use cfkit::quadrature::hankel_to_atoms;
use cfkit::UnivariatePoly;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{Grid, RunConfig};
use crate::error::CliError;
use crate::output::{real, write_csv, write_json, Metadata, Table};

pub const DEFAULT_T: usize = 3;
pub const DEFAULT_GAMMA: f64 = 0.5;
const DEFAULT_GRID: Grid = Grid {
    min: -1.5,
    max: 1.5,
    count: 101,
};

type Outcome = Result<(), CliError>;

/// Reads numeric rows; `#` lines are comments and a non-numeric first row
/// is taken as a header.
pub fn load_points(path: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{path}: {e}")))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(p) => {
                if let Some(first) = points.first() {
                    if first.len() != p.len() {
                        return Err(CliError::Config(format!(
                            "{path}: row {} has {} columns, expected {}",
                            i + 1,
                            p.len(),
                            first.len()
                        )));
                    }
                }
                if p.iter().any(|v| !v.is_finite()) {
                    return Err(CliError::Config(format!(
                        "{path}: row {} is not finite",
                        i + 1
                    )));
                }
                points.push(p);
            }
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(CliError::Config(format!(
                    "{path}: row {} is not numeric",
                    i + 1
                )))
            }
        }
    }
    if points.is_empty() {
        return Err(CliError::Config(format!("{path}: no data rows")));
    }
    Ok(points)
}

/// The run's measure, with sample files already read.
pub enum Measure {
    Spec(MeasureSpec),
    Points(Vec<Vec<f64>>),
}

impl Measure {
    pub fn resolve(cfg: &RunConfig) -> Result<Measure, CliError> {
        match (&cfg.measure, &cfg.input) {
            (Some(MeasureSpec::Samples { file }), _) => Ok(Measure::Points(load_points(file)?)),
            (Some(spec), _) => Ok(Measure::Spec(spec.clone())),
            (None, Some(input)) => Ok(Measure::Points(load_points(input)?)),
            (None, None) => Err(CliError::Config(
                "no measure: pass --box, --samples, --input or a config with \"measure\"".into(),
            )),
        }
    }

    pub fn source(&self, quad_order: usize) -> MeasureSource<'_> {
        match self {
            Measure::Spec(spec) => MeasureSource::Spec { spec, quad_order },
            Measure::Points(points) => MeasureSource::Samples(points),
        }
    }
}

struct Run<'a> {
    cfg: &'a RunConfig,
    measure: Option<Measure>,
}

impl Run<'_> {
    fn t(&self) -> usize {
        self.cfg.t.unwrap_or(DEFAULT_T)
    }

    fn quad(&self) -> usize {
        self.cfg.quad_order.unwrap_or(DEFAULT_QUAD_ORDER)
    }

    fn jitter(&self) -> f64 {
        self.cfg.jitter.unwrap_or(0.0)
    }

    fn measure(&self) -> Result<&Measure, CliError> {
        self.measure
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a measure".into()))
    }

    fn source(&self) -> Result<MeasureSource<'_>, CliError> {
        Ok(self.measure()?.source(self.quad()))
    }

    fn moments(&self, t: usize) -> Result<MomentSequence, CliError> {
        Ok(self.source()?.moments(t)?)
    }

    fn dim(&self) -> Result<usize, CliError> {
        Ok(self.source()?.dim()?)
    }

    /// Trailing coordinates conditioned on the leading ones.
    fn conditioned(&self, dim: usize) -> Result<usize, CliError> {
        let p = self.cfg.conditioned.unwrap_or(1);
        if p == 0 || p >= dim {
            return Err(CliError::Config(format!(
                "cannot condition {p} of {dim} coordinates"
            )));
        }
        Ok(p)
    }

    fn out(&self) -> Option<&str> {
        self.cfg.out.as_deref()
    }
}

pub fn needs_measure(command: &str) -> bool {
    !matches!(command, "maxdet" | "weighted-maxdet")
}

pub fn run(command: &str, cfg: &RunConfig) -> Outcome {
    let measure = if needs_measure(command) {
        Some(Measure::resolve(cfg)?)
    } else {
        None
    };
    let run = Run { cfg, measure };
    match command {
        "moments" => moments(&run),
        "cf-grid" => cf_grid(&run),
        "orthonormal" => orthonormal(&run),
        "disintegrate" => disintegrate(&run),
        "maxdet" => maxdet(&run),
        "weighted-maxdet" => weighted(&run),
        "decay-sweep" => decay(&run),
        "asymptotic-sweep" => asymptotic(&run),
        "conjecture-probe" => conjecture(&run),
        "score" => score(&run),
        other => Err(CliError::Config(format!("unknown command {other}"))),
    }
}

fn moments(run: &Run) -> Outcome {
    let t = run.t();
    let seq = run.moments(t)?;
    let mut meta = Metadata::new("moments", run.cfg);
    meta.extra("dim", seq.dim());
    meta.extra("degree", seq.degree());
    let mut table = Table::new(&["monomial", "degree", "value"]);
    let mut entries: Vec<_> = seq.iter().collect();
    // graded order reads better than the map's lexicographic one
    entries.sort_by(|(a, _), (b, _)| a.degree().cmp(&b.degree()).then_with(|| b.cmp(a)));
    for (m, v) in entries {
        table.rows.push(vec![
            monomial_label(m, seq.dim(), 0),
            m.degree().to_string(),
            real(v),
        ]);
    }
    write_csv(run.out(), &meta, &table)
}

/// Worker pool capped by `CF_MAX_THREADS`.
fn pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("CF_MAX_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            b = b.num_threads(n);
        }
    }
    b.build().map_err(|e| CliError::Io(e.to_string()))
}

fn cf_grid(run: &Run) -> Outcome {
    let t = run.t();
    let seq = run.moments(t)?;
    let dim = seq.dim();
    if dim > 2 {
        return Err(CliError::Config(format!(
            "cf-grid draws 1-D or 2-D measures, got {dim}"
        )));
    }
    let basis = OrderedBasis::new(dim, 0, t);
    let e = build_cf(&moment_matrix_with_jitter(&seq, &basis, run.jitter())?)?;
    let gamma = run.cfg.gamma;
    let xs = run.cfg.x_grid.unwrap_or(DEFAULT_GRID).points();
    let points: Vec<Vec<f64>> = if dim == 1 {
        xs.iter().map(|&x| vec![x]).collect()
    } else {
        let ys = run.cfg.y_grid.unwrap_or(DEFAULT_GRID).points();
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| vec![x, y]))
            .collect()
    };
    let s = basis.len() as f64;
    let values: Vec<f64> = pool()?.install(|| {
        points
            .par_iter()
            .map(|p| e.value(p))
            .collect::<Result<Vec<f64>, _>>()
    })?;

    let mut meta = Metadata::new("cf-grid", run.cfg);
    meta.condition("moment_matrix", e.condition());
    meta.extra("basis_size", basis.len());
    let mut header: Vec<&str> = if dim == 1 { vec!["x"] } else { vec!["x", "y"] };
    header.extend(["cf", "score"]);
    if gamma.is_some() {
        header.push("inside");
    }
    let mut table = Table::new(&header);
    for (p, v) in points.iter().zip(values) {
        let mut row: Vec<String> = p.iter().map(|&c| real(c)).collect();
        row.push(real(v));
        row.push(real(s * v));
        if let Some(g) = gamma {
            row.push((s * v >= g).to_string());
        }
        table.rows.push(row);
    }
    write_csv(run.out(), &meta, &table)
}

fn orthonormal(run: &Run) -> Outcome {
    let t = run.t();
    let seq = run.moments(t)?;
    let dim = seq.dim();
    let p = if dim == 1 { 0 } else { run.conditioned(dim)? };
    let basis = OrderedBasis::new(dim - p, p, t);
    let m = moment_matrix_with_jitter(&seq, &basis, run.jitter())?;
    let chol = orthonormal_chol(&m)?;
    let c = chol.coefficients();
    let ident = identity_gap(&(c * m.entries() * c.transpose()));
    let det = if basis.len() <= MAX_DET_BASIS && run.jitter() == 0.0 {
        Some(orthonormal_det(&seq, &basis)?)
    } else {
        None
    };
    let mut meta = Metadata::new("orthonormal", run.cfg);
    meta.condition("moment_matrix", m.condition());
    let result = json!({
        "labels": basis.labels(),
        "cholesky": rows(c),
        "determinant": det.as_ref().map(|d| rows(d.coefficients())),
        "normalizers": det.as_ref().map(|d| d.normalizers().to_vec()),
        "max_table_difference": det.as_ref().map(|d| (d.coefficients() - c).amax()),
        "orthonormality_residual": ident,
    });
    write_json(run.out(), &meta, result)
}

fn identity_gap(g: &cfkit::DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            let want = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((g[(r, c)] - want).abs());
        }
    }
    worst
}

/// Conditioning points: one per entry when `n = 1`, otherwise one point.
fn x_points(cfg: &RunConfig, n: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let xs = cfg.x.clone().unwrap_or_else(|| vec![0.0; n]);
    if n == 1 {
        Ok(xs.into_iter().map(|x| vec![x]).collect())
    } else if xs.len() == n {
        Ok(vec![xs])
    } else {
        Err(CliError::Config(format!(
            "--x needs {n} coordinates, got {}",
            xs.len()
        )))
    }
}

#[derive(Serialize)]
struct CoefficientTerm {
    monomial: String,
    exponents: Vec<u32>,
    value: f64,
}

fn disintegrate(run: &Run) -> Outcome {
    let t = run.t();
    let seq = run.moments(t)?;
    let dim = seq.dim();
    let p = run.conditioned(dim)?;
    let n = dim - p;
    let d = Disintegrator::from_moments_with_jitter(&seq, n, t, run.jitter())?;
    let mut meta = Metadata::new("disintegrate", run.cfg);
    meta.condition("joint", d.joint().condition());
    meta.condition("marginal", d.marginal().condition());
    let xs = x_points(run.cfg, n)?;

    if p > 1 {
        let mut out = Vec::new();
        for x in &xs {
            let poly = conditional_sos(d.joint(), d.marginal(), x)?;
            let terms: Vec<CoefficientTerm> = poly
                .terms()
                .map(|(m, v)| CoefficientTerm {
                    monomial: monomial_label(m, 0, p),
                    exponents: m.exponents().to_vec(),
                    value: v,
                })
                .collect();
            out.push(json!({ "x": x, "mode": "coefficients only", "coefficients": terms }));
        }
        return write_json(run.out(), &meta, out);
    }

    let grid = run.cfg.y_grid.unwrap_or(DEFAULT_GRID).points();
    let mut out = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let r = d.disintegrate_at(x)?;
        let residual = factorization_residual(d.joint(), &r, &grid)?;
        let sos_min = grid
            .iter()
            .map(|&y| r.sos_eval(y))
            .fold(f64::INFINITY, f64::min);
        meta.condition(format!("hankel[{i}]"), r.diagnostics.hankel_condition);
        meta.iterations(format!("newton[{i}]"), r.diagnostics.newton_iterations);
        out.push(json!({
            "disintegration": r,
            "factorization_residual": residual,
            "sos_min_on_grid": sos_min,
        }));
    }
    write_json(run.out(), &meta, out)
}

fn poly_arg(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    cfg.poly
        .clone()
        .filter(|p| !p.is_empty())
        .ok_or_else(|| CliError::Config("--poly is required".into()))
}

fn maxdet(run: &Run) -> Outcome {
    let sos = UnivariateSos::new(poly_arg(run.cfg)?);
    let r = maxdet_hankel(&sos)?;
    let atoms = hankel_to_atoms(&r.dual)?;
    let mut meta = Metadata::new("maxdet", run.cfg);
    meta.condition("hankel", cfkit::linalg::condition_number(&r.hankel));
    meta.iterations("newton", r.iterations);
    let result = json!({
        "poly": sos.coeffs(),
        "gram": rows(&r.gram),
        "hankel": rows(&r.hankel),
        "moments": r.dual,
        "log_det_gram": r.log_det_gram(),
        "mass": r.mass(),
        "atoms": atoms,
        "status": r.status,
        "gradient_norm": r.gradient_norm,
    });
    write_json(run.out(), &meta, result)
}

fn weighted(run: &Run) -> Outcome {
    let p = UnivariatePoly::new(poly_arg(run.cfg)?);
    let gens: Vec<UnivariatePoly> = run
        .cfg
        .generators
        .clone()
        .unwrap_or_else(|| vec![vec![1.0]])
        .into_iter()
        .map(UnivariatePoly::new)
        .collect();
    let smax = gens
        .iter()
        .map(|g| g.degree().div_ceil(2))
        .max()
        .unwrap_or(0);
    let t = run.cfg.t.unwrap_or(p.degree().div_ceil(2).max(smax));
    let cone = WeightedCone::new(gens, t)?;
    let r = weighted_maxdet(&p, &cone)?;
    let mut meta = Metadata::new("weighted-maxdet", run.cfg);
    for (j, b) in r.blocks.iter().enumerate() {
        meta.condition(format!("block[{j}]"), cfkit::linalg::condition_number(b));
    }
    meta.iterations("newton", r.iterations);
    let result = json!({
        "t": t,
        "half_degrees": cone.half_degrees(),
        "moments": r.dual,
        "blocks": r.blocks.iter().map(rows).collect::<Vec<_>>(),
        "grams": r.grams.iter().map(rows).collect::<Vec<_>>(),
        "multipliers": r.multipliers.iter().map(|m| m.coeffs().to_vec()).collect::<Vec<_>>(),
        "residual": r.residual(&p, &cone),
        "gradient_norm": r.gradient_norm,
    });
    write_json(run.out(), &meta, result)
}

fn t_list(cfg: &RunConfig, default: &[usize]) -> Vec<usize> {
    cfg.t_list.clone().unwrap_or_else(|| default.to_vec())
}

fn first_x(run: &Run, dim: usize) -> Result<Vec<f64>, CliError> {
    let n = if dim == 1 {
        1
    } else {
        dim - run.conditioned(dim)?
    };
    Ok(x_points(run.cfg, n)?.swap_remove(0))
}

fn decay(run: &Run) -> Outcome {
    let dim = run.dim()?;
    if dim < 2 || run.conditioned(dim)? != 1 {
        return Err(CliError::Config(
            "decay-sweep needs a joint measure with one conditioned coordinate".into(),
        ));
    }
    let x = first_x(run, dim)?;
    let y = run
        .cfg
        .y
        .ok_or_else(|| CliError::Config("--y is required".into()))?;
    let ts = t_list(run.cfg, &[2, 3, 4, 5, 6, 7, 8]);
    let s = decay_sweep_from(&run.source()?, &x, y, &ts)?;
    let mut meta = Metadata::new("decay-sweep", run.cfg);
    meta.extra("slope", s.slope);
    meta.extra("r_squared", s.r_squared);
    let mut table = Table::new(&["t", "cf"]);
    for row in &s.rows {
        table.rows.push(vec![row.t.to_string(), real(row.value)]);
    }
    write_csv(run.out(), &meta, &table)
}

fn asymptotic(run: &Run) -> Outcome {
    let dim = run.dim()?;
    let x = first_x(run, dim)?;
    let ts = t_list(run.cfg, &[2, 3, 4, 5, 6, 7, 8]);
    let rows = asymptotic_sweep_from(&run.source()?, &x, run.cfg.y, &ts)?;
    let meta = Metadata::new("asymptotic-sweep", run.cfg);
    let mut table = Table::new(&["t", "cf", "t_times_cf"]);
    for r in rows {
        table
            .rows
            .push(vec![r.t.to_string(), real(r.cf), real(r.scaled)]);
    }
    write_csv(run.out(), &meta, &table)
}

fn conjecture(run: &Run) -> Outcome {
    let dim = run.dim()?;
    if dim < 2 || run.conditioned(dim)? != 1 {
        return Err(CliError::Config(
            "conjecture-probe needs a joint measure with one conditioned coordinate".into(),
        ));
    }
    let x = first_x(run, dim)?;
    let ts = t_list(run.cfg, &[1, 2, 3, 4, 5]);
    let report = conjecture_probe_from(&run.source()?, &x, &ts)?;
    let mut meta = Metadata::new("conjecture-probe", run.cfg);
    for b in &report.blocks {
        meta.condition(
            format!("hankel[t={}]", b.t),
            cfkit::linalg::condition_number(&b.hankel),
        );
    }
    write_json(run.out(), &meta, report)
}

fn score(run: &Run) -> Outcome {
    let input = run
        .cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Config("--input is required".into()))?;
    let points = load_points(input)?;
    let t = run.t();
    let seq = run.moments(t)?;
    if seq.dim() != points[0].len() {
        return Err(CliError::Config(format!(
            "points have {} coordinates, measure has {}",
            points[0].len(),
            seq.dim()
        )));
    }
    let basis = OrderedBasis::new(seq.dim(), 0, t);
    let e = build_cf(&moment_matrix_with_jitter(&seq, &basis, run.jitter())?)?;
    let gamma = run.cfg.gamma.unwrap_or(DEFAULT_GAMMA);
    let chunks: Vec<&[Vec<f64>]> = points.chunks(256).collect();
    let scored = pool()?.install(|| {
        chunks
            .par_iter()
            .map(|c| score_points(&e, c, gamma))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut meta = Metadata::new("score", run.cfg);
    meta.condition("moment_matrix", e.condition());
    meta.extra("gamma", gamma);
    let mut header: Vec<String> = if seq.dim() == 2 {
        vec!["x".into(), "y".into()]
    } else {
        (1..=seq.dim()).map(|i| format!("x{i}")).collect()
    };
    header.extend(["score".into(), "inside".into()]);
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    for s in scored.into_iter().flatten() {
        let mut row: Vec<String> = s.point.iter().map(|&c| real(c)).collect();
        row.push(real(s.score));
        row.push(s.inside.to_string());
        table.rows.push(row);
    }
    write_csv(run.out(), &meta, &table)
}
