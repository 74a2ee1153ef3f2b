//! Convergence studies comparing full DG with the embedded Trefftz method,
//! the 1D plane-wave approximation study and the dof/nonzero table.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use crate::analysis::{dg_norm_error, dof_report, l2_error, DofCounts, OperatorClass};
use crate::basis::{make_basis, quadrature_for};
use crate::densela::{cond2, pseudo_apply, DenseMatrix, KernelMethod, KernelOptions, DEFAULT_EPS};
use crate::dgforms::{
    assemble_advection, assemble_helmholtz, assemble_sip, AssembledSystem, DGProblem, RealFn,
    VelocityFn, DEFAULT_HELMHOLTZ_OMEGA,
};
use crate::diffop;
use crate::embedding::{assemble_w, build_embedding, embed, solve_embedded};
use crate::error::{Error, Result};
use crate::mesh::{interval_mesh, rectangle_mesh, refine, unit_square_mesh, Mesh, Point};
use crate::scalar::{Complex64, Scalar};
use crate::sparsela::SymmetryHint;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemName {
    Laplace,
    Poisson,
    Helmholtz,
    Advection,
}

impl FromStr for ProblemName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "laplace" => Ok(Self::Laplace),
            "poisson" => Ok(Self::Poisson),
            "helmholtz" => Ok(Self::Helmholtz),
            "advection" => Ok(Self::Advection),
            other => Err(Error::Config(format!(
                "unknown problem `{other}` (expected laplace, poisson, helmholtz or advection)"
            ))),
        }
    }
}

impl fmt::Display for ProblemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Laplace => "laplace",
            Self::Poisson => "poisson",
            Self::Helmholtz => "helmholtz",
            Self::Advection => "advection",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub problem: ProblemName,
    pub pmin: usize,
    pub pmax: usize,
    /// Number of mesh levels: the base mesh and `refinements - 1` uniform
    /// refinements of it.
    pub refinements: usize,
    /// Base mesh is `unit_square_mesh(base_n)`.
    pub base_n: usize,
    pub eps: f64,
    pub kernel_method: KernelMethod,
    pub omega: f64,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub timings: bool,
    /// Condition numbers are computed for systems up to this size.
    pub cond_max_ndof: usize,
}

impl StudyConfig {
    pub fn defaults(problem: ProblemName) -> Self {
        // n = 2 leaves the ω = 4π wave unresolved
        let (pmin, pmax, refinements, base_n) = match problem {
            ProblemName::Helmholtz => (3, 4, 3, 4),
            _ => (2, 4, 4, 2),
        };
        Self {
            problem,
            pmin,
            pmax,
            refinements,
            base_n,
            eps: DEFAULT_EPS,
            kernel_method: KernelMethod::Svd,
            omega: DEFAULT_HELMHOLTZ_OMEGA,
            out: None,
            threads: None,
            timings: false,
            cond_max_ndof: 400,
        }
    }

    /// Builds a configuration from `key = value` entries applied in order on
    /// top of the defaults of the selected problem.
    pub fn from_entries(entries: &[(String, String)]) -> Result<Self> {
        let problem = entries
            .iter()
            .rev()
            .find(|(k, _)| normalize_key(k) == "problem")
            .map_or(Ok(ProblemName::Laplace), |(_, v)| v.parse())?;
        let mut cfg = Self::defaults(problem);
        for (k, v) in entries {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let key_n = normalize_key(key);
        let bad =
            |what: &str| Error::Config(format!("invalid value `{value}` for key `{key}` ({what})"));
        let int = || {
            value
                .parse::<usize>()
                .map_err(|_| bad("expected a non-negative integer"))
        };
        let float = || value.parse::<f64>().map_err(|_| bad("expected a number"));
        match key_n.as_str() {
            "problem" => self.problem = value.parse()?,
            "pmin" => self.pmin = int()?,
            "pmax" => self.pmax = int()?,
            "refinements" => self.refinements = int()?,
            "base_n" => self.base_n = int()?,
            "eps" => self.eps = float()?,
            "kernel_method" => self.kernel_method = value.parse()?,
            "omega" => self.omega = float()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "threads" => self.threads = Some(int()?),
            "timings" => self.timings = value.parse().map_err(|_| bad("expected true or false"))?,
            "cond_max_ndof" => self.cond_max_ndof = int()?,
            _ => return Err(Error::Config(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.pmin > self.pmax {
            return fail(format!("pmin = {} exceeds pmax = {}", self.pmin, self.pmax));
        }
        if self.pmax > 10 {
            return fail(format!(
                "pmax = {} is above the supported maximum of 10",
                self.pmax
            ));
        }
        if self.refinements == 0 {
            return fail("refinements must be at least 1".into());
        }
        if self.base_n == 0 {
            return fail("base_n must be at least 1".into());
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return fail(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return fail(format!("omega must be positive, got {}", self.omega));
        }
        if self.threads == Some(0) {
            return fail("threads must be at least 1".into());
        }
        Ok(())
    }

    pub fn kernel_options(&self) -> KernelOptions {
        KernelOptions::new(self.eps, self.kernel_method)
    }
}

fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_")
}

/// Parses a flat `key = value` file; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dg,
    Embedded,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dg => "dg",
            Method::Embedded => "embedded",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRecord {
    pub problem: ProblemName,
    pub method: Method,
    pub p: usize,
    pub h: f64,
    pub ndof: usize,
    pub nzes: usize,
    pub l2_error: f64,
    pub dg_error: Option<f64>,
    pub cond_full: Option<f64>,
    pub cond_reduced: Option<f64>,
    pub t_assemble: f64,
    pub t_embed: Option<f64>,
    pub t_solve: f64,
}

pub const STUDY_HEADER: &str =
    "problem,method,p,h,ndof,nzes,l2_error,dg_error,cond_full,cond_reduced,t_assemble,t_embed,t_solve";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Writes the study CSV. Timing cells stay empty unless `timings` is set,
/// which keeps repeated runs byte-identical.
pub fn write_study_csv<W: Write>(records: &[StudyRecord], timings: bool, mut w: W) -> Result<()> {
    writeln!(w, "{STUDY_HEADER}")?;
    let time = |v: Option<f64>| if timings { opt(v) } else { String::new() };
    for r in records {
        writeln!(
            w,
            "{},{},{},{:e},{},{},{:e},{},{},{},{},{},{}",
            r.problem,
            r.method,
            r.p,
            r.h,
            r.ndof,
            r.nzes,
            r.l2_error,
            opt(r.dg_error),
            opt(r.cond_full),
            opt(r.cond_reduced),
            time(Some(r.t_assemble)),
            time(r.t_embed),
            time(Some(r.t_solve)),
        )?;
    }
    Ok(())
}

enum Exact {
    Real { u: RealFn, grad: VelocityFn },
    Complex(Arc<dyn Fn(Point) -> Complex64 + Send + Sync>),
}

/// A problem with known solution.
pub struct Benchmark {
    pub problem: DGProblem,
    exact: Exact,
    pub hint: SymmetryHint,
}

/// Propagation direction of the Helmholtz plane wave.
pub const PLANE_WAVE_DIRECTION: [f64; 2] = [0.6, 0.8];

impl Benchmark {
    pub fn new(name: ProblemName, omega: f64) -> Self {
        match name {
            ProblemName::Laplace => {
                let u: RealFn = Arc::new(|x| x[0].exp() * x[1].sin());
                Self {
                    problem: DGProblem::sip(u.clone(), None),
                    exact: Exact::Real {
                        u,
                        grad: Arc::new(|x| [x[0].exp() * x[1].sin(), x[0].exp() * x[1].cos()]),
                    },
                    hint: SymmetryHint::PositiveDefinite,
                }
            }
            ProblemName::Poisson => {
                let u: RealFn = Arc::new(|x| (PI * x[0]).sin() * (PI * x[1]).sin());
                let f: RealFn = Arc::new(|x| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin());
                Self {
                    problem: DGProblem::sip(u.clone(), Some(f)),
                    exact: Exact::Real {
                        u,
                        grad: Arc::new(|x| {
                            [
                                PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                                PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
                            ]
                        }),
                    },
                    hint: SymmetryHint::PositiveDefinite,
                }
            }
            ProblemName::Helmholtz => {
                let d = PLANE_WAVE_DIRECTION;
                let wave =
                    move |x: Point| (Complex64::i() * omega * (d[0] * x[0] + d[1] * x[1])).exp();
                // g = ∂u/∂n + iωu = iω (d·n + 1) u
                let robin = Arc::new(move |x: Point, n: Point| {
                    Complex64::i() * omega * (d[0] * n[0] + d[1] * n[1] + 1.0) * wave(x)
                });
                Self {
                    problem: DGProblem::helmholtz(omega, robin),
                    exact: Exact::Complex(Arc::new(wave)),
                    hint: SymmetryHint::General,
                }
            }
            ProblemName::Advection => {
                let u: RealFn = Arc::new(|x| x[0].sin() * x[1].sin());
                let b: VelocityFn = Arc::new(|x| [-x[1].sin(), x[0].cos()]);
                // f = b·∇u
                let f: RealFn = Arc::new(|x| {
                    -x[1].sin() * x[0].cos() * x[1].sin() + x[0].cos() * x[0].sin() * x[1].cos()
                });
                Self {
                    problem: DGProblem::advection(b, u.clone(), Some(f)),
                    exact: Exact::Real {
                        u,
                        grad: Arc::new(|x| [x[0].cos() * x[1].sin(), x[0].sin() * x[1].cos()]),
                    },
                    hint: SymmetryHint::General,
                }
            }
        }
    }

    /// L² error of a real coefficient vector.
    pub fn l2_error_real(&self, u_h: &[f64], mesh: &Mesh, p: usize) -> Result<f64> {
        match &self.exact {
            Exact::Real { u, .. } => l2_error(u_h, |x| u(x), mesh, p),
            Exact::Complex(_) => Err(Error::NotApplicable("complex benchmark".into())),
        }
    }

    pub fn l2_error_complex(&self, u_h: &[Complex64], mesh: &Mesh, p: usize) -> Result<f64> {
        match &self.exact {
            Exact::Complex(u) => l2_error(u_h, |x| u(x), mesh, p),
            Exact::Real { u, .. } => l2_error(u_h, |x| Complex64::new(u(x), 0.0), mesh, p),
        }
    }

    /// DG-norm error for SIP problems.
    pub fn dg_error(&self, u_h: &[f64], mesh: &Mesh, p: usize) -> Result<Option<f64>> {
        match (&self.exact, self.problem.penalty()) {
            (Exact::Real { u, grad }, Some(alpha)) => Ok(Some(dg_norm_error(
                u_h,
                |x| u(x),
                |x| grad(x),
                mesh,
                p,
                alpha,
            )?)),
            _ => Ok(None),
        }
    }
}

/// Meshes of a study: the base mesh and its successive refinements.
pub fn study_meshes(base_n: usize, levels: usize) -> Result<Vec<Mesh>> {
    let mut meshes = vec![unit_square_mesh(base_n)?];
    for _ in 1..levels {
        let next = refine(meshes.last().unwrap());
        meshes.push(next);
    }
    Ok(meshes)
}

fn seconds(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn dense_cond<S: Scalar>(
    a: &crate::sparsela::BlockSparseMatrix<S>,
    limit: usize,
) -> Result<Option<f64>> {
    let n = a.shape().0;
    if n == 0 || n > limit {
        return Ok(None);
    }
    Ok(Some(cond2(&a.to_dense())?))
}

struct Solved<S> {
    full: Vec<S>,
    embedded: Vec<S>,
    records: [StudyRecord; 2],
}

fn solve_point<S: Scalar>(
    cfg: &StudyConfig,
    bench: &Benchmark,
    mesh: &Mesh,
    p: usize,
    sys: AssembledSystem<S>,
    t_assemble: f64,
) -> Result<Solved<S>> {
    let t = Instant::now();
    let emb = embed(mesh, p, &bench.problem, &cfg.kernel_options())?;
    let t_embed = seconds(t);

    let t = Instant::now();
    let full = sys.solve(bench.hint)?;
    let t_full = seconds(t);

    let t = Instant::now();
    let red = solve_embedded(&sys, &emb, bench.hint)?;
    let t_red = seconds(t);

    let base = StudyRecord {
        problem: cfg.problem,
        method: Method::Dg,
        p,
        h: mesh.h_max(),
        ndof: sys.n,
        nzes: sys.a.structural_nnz(),
        l2_error: f64::NAN,
        dg_error: None,
        cond_full: dense_cond(&sys.a, cfg.cond_max_ndof)?,
        cond_reduced: None,
        t_assemble,
        t_embed: None,
        t_solve: t_full,
    };
    let embedded = StudyRecord {
        method: Method::Embedded,
        ndof: red.report.m,
        nzes: red.report.nnz_reduced,
        cond_full: None,
        cond_reduced: dense_cond(&red.reduced, cfg.cond_max_ndof)?,
        t_embed: Some(t_embed),
        t_solve: t_red,
        ..base.clone()
    };
    log::info!(
        "{} p={p} h={:.4}: N={} M={} ({} / {})",
        cfg.problem,
        mesh.h_max(),
        sys.n,
        red.report.m,
        full.method,
        red.report.solver
    );
    Ok(Solved {
        full: full.x,
        embedded: red.u_h,
        records: [base, embedded],
    })
}

/// Runs the configured study; rows are ordered by `p`, then mesh level, then
/// method.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<StudyRecord>> {
    cfg.validate()?;
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| run_study_inner(cfg)),
        None => run_study_inner(cfg),
    }
}

fn run_study_inner(cfg: &StudyConfig) -> Result<Vec<StudyRecord>> {
    let bench = Benchmark::new(cfg.problem, cfg.omega);
    let meshes = study_meshes(cfg.base_n, cfg.refinements)?;
    let mut out = Vec::new();
    for p in cfg.pmin..=cfg.pmax {
        for mesh in &meshes {
            let t = Instant::now();
            let records = match cfg.problem {
                ProblemName::Helmholtz => {
                    let sys = assemble_helmholtz(mesh, p, &bench.problem)?;
                    let s = solve_point(cfg, &bench, mesh, p, sys, seconds(t))?;
                    let mut r = s.records;
                    r[0].l2_error = bench.l2_error_complex(&s.full, mesh, p)?;
                    r[1].l2_error = bench.l2_error_complex(&s.embedded, mesh, p)?;
                    r
                }
                _ => {
                    let sys = match cfg.problem {
                        ProblemName::Advection => assemble_advection(mesh, p, &bench.problem)?,
                        _ => assemble_sip(mesh, p, &bench.problem)?,
                    };
                    let s = solve_point(cfg, &bench, mesh, p, sys, seconds(t))?;
                    let mut r = s.records;
                    r[0].l2_error = bench.l2_error_real(&s.full, mesh, p)?;
                    r[1].l2_error = bench.l2_error_real(&s.embedded, mesh, p)?;
                    r[0].dg_error = bench.dg_error(&s.full, mesh, p)?;
                    r[1].dg_error = bench.dg_error(&s.embedded, mesh, p)?;
                    r
                }
            };
            out.extend(records);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneWaveRow {
    pub p: usize,
    pub ndof_full: usize,
    pub ndof_embedded: usize,
    pub sin_full: f64,
    pub sin_embedded: f64,
    pub cos_full: f64,
    pub cos_embedded: f64,
}

pub const PLANE_WAVE_HEADER: &str =
    "p,ndof_full,ndof_embedded,sin_full,sin_embedded,cos_full,cos_embedded";

/// Default wavenumber of the 1D study.
pub const PLANE_WAVE_OMEGA: f64 = 2.0 * PI;

/// Best L² approximation of `sin(ωx)` and `cos(ωx)` on `[0, 1]` in the
/// full polynomial space and in the embedded space of `-u'' - ω²u`.
pub fn run_planewave_1d(ps: &[usize], omega: f64, eps: f64) -> Result<Vec<PlaneWaveRow>> {
    let mesh = interval_mesh(0.0, 1.0, 1)?;
    let op = diffop::helmholtz(omega, 1);
    let test = op.leading_part();
    let mut rows = Vec::with_capacity(ps.len());
    for &p in ps {
        let w = assemble_w(&mesh, p, &op, &test, 2 * p + 2)?;
        let emb = build_embedding(&w, &KernelOptions::new(eps, KernelMethod::Svd))?;
        let t = emb.block(0).clone();
        let full = DenseMatrix::identity(t.rows());
        let approx = |space: &DenseMatrix, f: &dyn Fn(f64) -> f64| {
            best_approximation_error(&mesh, p, space, f, eps)
        };
        let sin = |x: f64| (omega * x).sin();
        let cos = |x: f64| (omega * x).cos();
        rows.push(PlaneWaveRow {
            p,
            ndof_full: t.rows(),
            ndof_embedded: t.cols(),
            sin_full: approx(&full, &sin)?,
            sin_embedded: approx(&t, &sin)?,
            cos_full: approx(&full, &cos)?,
            cos_embedded: approx(&t, &cos)?,
        });
    }
    Ok(rows)
}

/// Weighted discrete least squares over a high-order rule; `space` holds the
/// coefficient vectors spanning the approximation space.
fn best_approximation_error(
    mesh: &Mesh,
    p: usize,
    space: &DenseMatrix,
    f: &dyn Fn(f64) -> f64,
    eps: f64,
) -> Result<f64> {
    let basis = make_basis(mesh, 0, p);
    let rule = quadrature_for(mesh, 0, 4 * p + 40);
    let k = space.cols();
    let mut rows = Vec::with_capacity(rule.len());
    let mut rhs = Vec::with_capacity(rule.len());
    for (x, w) in rule.iter() {
        let sw = w.sqrt();
        let phi = basis.eval_all(x);
        rows.push(
            (0..k)
                .map(|c| sw * (0..phi.len()).map(|j| phi[j] * space[(j, c)]).sum::<f64>())
                .collect(),
        );
        rhs.push(sw * f(x[0]));
    }
    if k == 0 {
        return Ok(rhs.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    let b = DenseMatrix::from_rows(&rows)?;
    Ok(pseudo_apply(&b, &rhs, eps.min(1e-14))?.residual)
}

pub fn write_planewave_csv<W: Write>(rows: &[PlaneWaveRow], mut w: W) -> Result<()> {
    writeln!(w, "{PLANE_WAVE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{:e},{:e},{:e},{:e}",
            r.p,
            r.ndof_full,
            r.ndof_embedded,
            r.sin_full,
            r.sin_embedded,
            r.cos_full,
            r.cos_embedded
        )?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofRow {
    pub p: usize,
    pub n_elements: usize,
    pub second_order: DofCounts,
    pub first_order: DofCounts,
}

pub const DOF_HEADER: &str =
    "p,n_elements,dg_ndofs,tdg2_ndofs,tdg1_ndofs,dg_nzes,tdg2_nzes,tdg1_nzes";

/// Rectangle mesh with `n_elements` triangles, as square as possible.
pub fn mesh_with_elements(n_elements: usize) -> Result<Mesh> {
    if n_elements == 0 || !n_elements.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "element count {n_elements} must be a positive even number"
        )));
    }
    let cells = n_elements / 2;
    let nx = (1..=cells)
        .filter(|d| cells.is_multiple_of(*d) && d * d <= cells)
        .max()
        .unwrap_or(1);
    rectangle_mesh(nx, cells / nx)
}

pub fn run_dof_table(n_elements: usize, ps: &[usize]) -> Result<Vec<DofRow>> {
    let mesh = mesh_with_elements(n_elements)?;
    ps.iter()
        .map(|&p| {
            Ok(DofRow {
                p,
                n_elements,
                second_order: dof_report(&mesh, p, OperatorClass::SecondOrder)?,
                first_order: dof_report(&mesh, p, OperatorClass::FirstOrder)?,
            })
        })
        .collect()
}

pub fn write_dof_csv<W: Write>(rows: &[DofRow], mut w: W) -> Result<()> {
    writeln!(w, "{DOF_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.p,
            r.n_elements,
            r.second_order.ndofs_full,
            r.second_order.ndofs_reduced,
            r.first_order.ndofs_reduced,
            r.second_order.nze_full,
            r.second_order.nze_reduced,
            r.first_order.nze_reduced,
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let entries = parse_config_text(
            "problem = poisson\n# comment\npmax=3 # trailing\n\nkernel-method = qr\n",
        )
        .unwrap();
        let cfg = StudyConfig::from_entries(&entries).unwrap();
        assert_eq!(cfg.problem, ProblemName::Poisson);
        assert_eq!(cfg.pmax, 3);
        assert_eq!(cfg.kernel_method, KernelMethod::Qr);

        let err = StudyConfig::from_entries(&[("colour".into(), "red".into())]).unwrap_err();
        assert!(err.to_string().contains("colour"));
        assert!(StudyConfig::from_entries(&[("pmin".into(), "5".into())]).is_err());
        assert!(parse_config_text("just words").is_err());
        assert!(StudyConfig::from_entries(&[("eps".into(), "-1".into())]).is_err());
    }

    #[test]
    fn helmholtz_defaults() {
        let cfg = StudyConfig::from_entries(&[("problem".into(), "helmholtz".into())]).unwrap();
        assert_eq!(
            (cfg.pmin, cfg.pmax, cfg.refinements, cfg.base_n),
            (3, 4, 3, 4)
        );
        assert!((cfg.omega - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn element_count_factorization() {
        let m = mesh_with_elements(54).unwrap();
        assert_eq!(m.num_elements(), 54);
        assert!(mesh_with_elements(7).is_err());
    }
}
