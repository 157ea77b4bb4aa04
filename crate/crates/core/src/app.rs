//! Scenario runners behind the command-line interface.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::config::{OutputFormat, ScenarioConfig, SystemKind};
use crate::delay::{integrate_dde, linearize, DelayField, DelayHamiltonian, InitialFunction, Kernel, RevisedDelay, RevisedMode};
use crate::dynamics::{
    equilibrium_point, integrate_rk4, jacobian, steps_for, EquilibriumFamily, Family, JacobianMode, Rabinovich,
    Trajectory, VectorField,
};
use crate::error::{Error, Result};
use crate::fractional::{computed_char_fn_500, integrate_abm, integrate_abm_delay, printed_char_fn_500, FracOrder};
use crate::io::{write_csv, write_json};
use crate::metriplectic::{compare_with_printed, CharPoly, Literal10, Literal38, MetriplecticSystem, PrintedSystem};
use crate::poisson::{c1, h1, h3, p1, QuadraticFn};
use crate::stability::{classify_spectral, eigenvalues, matignon_check, scan_roots, LinearizationPair, Region, StabilityVerdict};
use crate::state::{Mat3, StateVec};

const FAMILIES: [Family; 3] = [Family::E1, Family::E2, Family::E3];

fn monitor_fns(names: &[String]) -> Result<Vec<QuadraticFn>> {
    names
        .iter()
        .map(|n| match n.as_str() {
            "h1" => Ok(h1()),
            "c1" => Ok(c1()),
            "h3" => Ok(h3()),
            other => Err(Error::config("monitors", format!("unknown monitor `{other}`"))),
        })
        .collect()
}

/// The undelayed vector field of an ODE system.
fn ode_field(cfg: &ScenarioConfig) -> Result<Option<Box<dyn VectorField>>> {
    Ok(Some(match cfg.system {
        SystemKind::Classical | SystemKind::Fractional => Box::new(Rabinovich),
        SystemKind::MetriplecticFirst => Box::new(MetriplecticSystem::first_kind(p1(), h1())?),
        SystemKind::MetriplecticSecond => Box::new(MetriplecticSystem::second_kind(p1(), h1(), c1())?),
        SystemKind::Literal38 => Box::new(Literal38),
        SystemKind::Literal10 => Box::new(Literal10),
        SystemKind::Delay | SystemKind::DelayRevised | SystemKind::FractionalDelay => return Ok(None),
    }))
}

fn delay_field(cfg: &ScenarioConfig) -> Result<Option<Box<dyn DelayField>>> {
    let weights = || cfg.weights.ok_or_else(|| Error::config("eps", "required for delay systems"));
    let mode = cfg.mode.unwrap_or(RevisedMode::Constructed);
    Ok(Some(match cfg.system {
        SystemKind::Delay => Box::new(DelayHamiltonian::new(weights()?)),
        SystemKind::DelayRevised | SystemKind::FractionalDelay => Box::new(RevisedDelay::new(weights()?, mode)),
        _ => return Ok(None),
    }))
}

fn require_alpha(cfg: &ScenarioConfig) -> Result<FracOrder> {
    cfg.alpha.ok_or_else(|| Error::config("alpha", format!("required for system `{}`", cfg.system)))
}

/// The kernel seen by the analysis: the configured one, or the point delay of
/// the fractional delay system.
fn analysis_kernel(cfg: &ScenarioConfig) -> Result<Option<Kernel>> {
    match cfg.system {
        SystemKind::FractionalDelay => {
            let tau = cfg.tau.ok_or_else(|| Error::config("tau", "required for system `fractional-delay`"))?;
            Ok(Some(Kernel::dirac(tau).map_err(|e| Error::config("tau", e.to_string()))?))
        }
        _ => Ok(cfg.kernel),
    }
}

/// Integrates the configured scenario and returns the trajectory with the
/// name of the scheme used.
pub fn simulate(cfg: &ScenarioConfig) -> Result<(Trajectory, &'static str)> {
    let x0 = cfg.require_x0()?;
    let dt = cfg.require_dt()?;
    let t_end = cfg.require_t_end()?;
    let monitors = monitor_fns(&cfg.monitors)?;
    let n = steps_for(t_end, dt);
    match cfg.system {
        SystemKind::Fractional => {
            let alpha = require_alpha(cfg)?;
            let f = integrate_abm(&Rabinovich, x0, alpha, dt, n, &monitors)?;
            Ok((f.trajectory, "abm-pece"))
        }
        SystemKind::FractionalDelay => {
            let alpha = require_alpha(cfg)?;
            let tau = cfg.tau.ok_or_else(|| Error::config("tau", "required for system `fractional-delay`"))?;
            let field = delay_field(cfg)?.expect("delay system");
            let f = integrate_abm_delay(field.as_ref(), InitialFunction::Constant(x0), tau, alpha, dt, n, &monitors)?;
            Ok((f.trajectory, "abm-pece-delay"))
        }
        SystemKind::Delay | SystemKind::DelayRevised => {
            let kernel = cfg.kernel.ok_or_else(|| Error::config("kernel.type", "required for delay systems"))?;
            let field = delay_field(cfg)?.expect("delay system");
            let sol = integrate_dde(field.as_ref(), &kernel, InitialFunction::Constant(x0), dt, t_end, &monitors)?;
            let scheme = if kernel.is_unbounded() { "rk4-linear-chain" } else { "rk4-method-of-steps" };
            Ok((sol.trajectory, scheme))
        }
        _ => {
            let field = ode_field(cfg)?.expect("ode system");
            Ok((integrate_rk4(field.as_ref(), x0, dt, n, &monitors)?, "rk4"))
        }
    }
}

/// Runs a scenario and writes the trajectory to the configured output.
pub fn run_simulate(cfg: &ScenarioConfig) -> Result<PathBuf> {
    let out = cfg.output.clone().ok_or_else(|| Error::config("output", "required to simulate"))?;
    let (traj, scheme) = simulate(cfg)?;
    match out.format {
        OutputFormat::Csv => write_csv(&traj, &out.path)?,
        OutputFormat::Json => {
            let mut meta = cfg.to_json();
            if let Value::Object(m) = &mut meta {
                m.insert("scheme".into(), json!(scheme));
                m.insert("steps".into(), json!(traj.len() - 1));
            }
            write_json(&traj, meta, &out.path)?
        }
    }
    Ok(out.path)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnalysisTarget {
    Equilibria,
    CharPoly,
    Matignon,
    Roots,
}

impl AnalysisTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            AnalysisTarget::Equilibria => "equilibria",
            AnalysisTarget::CharPoly => "charpoly",
            AnalysisTarget::Matignon => "matignon",
            AnalysisTarget::Roots => "roots",
        }
    }
}

impl FromStr for AnalysisTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equilibria" => Ok(AnalysisTarget::Equilibria),
            "charpoly" => Ok(AnalysisTarget::CharPoly),
            "matignon" => Ok(AnalysisTarget::Matignon),
            "roots" => Ok(AnalysisTarget::Roots),
            other => Err(Error::config(
                "--target",
                format!("unknown target `{other}`; expected equilibria, charpoly, matignon or roots"),
            )),
        }
    }
}

/// Machine-readable and human-readable forms of one analysis.
#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub json: Value,
    pub text: String,
}

fn mat_json(m: &Mat3) -> Value {
    // adding 0.0 turns -0.0 into 0.0
    json!((0..3).map(|i| [m[(i, 0)] + 0.0, m[(i, 1)] + 0.0, m[(i, 2)] + 0.0]).collect::<Vec<_>>())
}

fn fmt_c(z: &num_complex::Complex64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

/// Linear part at an equilibrium: `A` alone for ODE systems, `(A, B)` for delay systems.
struct Linearization {
    point: StateVec,
    residual: f64,
    pair: LinearizationPair,
    delayed: bool,
}

fn linearize_at(cfg: &ScenarioConfig, fam: Family, m: f64) -> Result<Linearization> {
    let point = equilibrium_point(EquilibriumFamily::new(fam, m));
    if let Some(field) = ode_field(cfg)? {
        let a = match jacobian(field.as_ref(), &point, JacobianMode::Analytic) {
            Ok(a) => a,
            Err(Error::NoAnalyticJacobian(_)) => jacobian(field.as_ref(), &point, JacobianMode::FiniteDifference)?,
            Err(e) => return Err(e),
        };
        return Ok(Linearization {
            point,
            residual: field.eval(&point).sup_norm(),
            pair: LinearizationPair::new(a, Mat3::zeros())?,
            delayed: false,
        });
    }
    let field = delay_field(cfg)?.expect("delay system");
    let (a, b) = linearize(field.as_ref(), &point)
        .ok_or_else(|| Error::domain(format!("field `{}` has no polynomial form", field.name())))?;
    Ok(Linearization {
        point,
        residual: field.eval(&point, &point).sup_norm(),
        pair: LinearizationPair::new(a, b)?,
        delayed: true,
    })
}

/// Verdict for the undelayed linear part `A + B` (the delayed state equals the
/// current one at an equilibrium); Matignon's sector test for fractional systems.
fn verdict(cfg: &ScenarioConfig, lin: &Linearization) -> StabilityVerdict {
    let j = lin.pair.a + lin.pair.b;
    match cfg.alpha {
        Some(alpha) if cfg.system.is_fractional() => matignon_check(&j, alpha),
        _ => classify_spectral(&j),
    }
}

pub fn analyze(cfg: &ScenarioConfig, target: AnalysisTarget) -> Result<AnalysisReport> {
    let m = cfg.require_m()?;
    let mut text = format!("system {} at m = {m}, target {}\n", cfg.system, target.as_str());
    let mut families = Vec::new();
    let printed_sys = match cfg.system {
        SystemKind::Literal38 => Some(PrintedSystem::Literal38),
        SystemKind::Literal10 => Some(PrintedSystem::Literal10),
        _ => None,
    };
    let region = match target {
        AnalysisTarget::Roots => {
            let scan = cfg.scan.ok_or_else(|| Error::config("scan.region", "required for target `roots`"))?;
            let [a, b, c, d] = scan.region;
            Some((Region::new(a, b, c, d).map_err(|e| Error::config("scan.region", e.to_string()))?, scan.grid))
        }
        _ => None,
    };
    if target == AnalysisTarget::Matignon && !cfg.system.is_fractional() {
        return Err(Error::config("system", "target `matignon` needs a fractional system"));
    }

    for fam in FAMILIES {
        let lin = linearize_at(cfg, fam, m)?;
        let mut entry = json!({
            "family": fam,
            "point": lin.point,
            "stationarity_residual": lin.residual,
        });
        let _ = writeln!(text, "{fam}: point {} residual {:.3e}", lin.point, lin.residual);
        let stationary = lin.residual <= 1e-12 * (1.0 + m * m);
        if !stationary {
            entry["note"] = json!("not stationary for this field; linear analysis skipped");
            let _ = writeln!(text, "  not stationary; linear analysis skipped");
        }
        if stationary {
            entry["jacobian"] = mat_json(&lin.pair.a);
            if lin.delayed {
                entry["delayed_jacobian"] = mat_json(&lin.pair.b);
            }
        }
        match target {
            AnalysisTarget::Equilibria if stationary => {
                let v = verdict(cfg, &lin);
                let _ = writeln!(
                    text,
                    "  eigenvalues {}\n  verdict {}{}",
                    v.eigenvalues.iter().map(fmt_c).collect::<Vec<_>>().join(", "),
                    v.classification,
                    if v.zero_eigenvalue_flag { " (zero eigenvalue)" } else { "" }
                );
                entry["verdict"] = serde_json::to_value(&v)?;
                if lin.delayed {
                    entry["verdict_basis"] = json!("A + B, the zero-delay limit; target `roots` gives the delayed spectrum");
                    let _ = writeln!(text, "  (verdict of A + B, the zero-delay limit; see target `roots` for the delayed spectrum)");
                }
            }
            AnalysisTarget::CharPoly => {
                if stationary {
                    let cp = CharPoly::of_matrix(&(lin.pair.a + lin.pair.b));
                    let _ = writeln!(text, "  det(lambda I - J) coefficients (highest first) {:?}", cp.coeffs);
                    entry["charpoly"] = json!(cp.coeffs);
                    if let Some(alpha) = cfg.alpha.filter(|_| cfg.system == SystemKind::Fractional) {
                        let probe = num_complex::Complex64::new(1.0, 0.5);
                        let comp = computed_char_fn_500(fam, m, probe, alpha);
                        let printed = printed_char_fn_500(fam, m, probe, alpha);
                        let _ = writeln!(
                            text,
                            "  in mu = lambda^alpha; at lambda = 1+0.5i computed {} printed {}",
                            fmt_c(&comp),
                            fmt_c(&printed)
                        );
                        entry["fractional_probe"] = json!({"lambda": probe, "computed": comp, "printed": printed});
                    }
                }
                if let Some(sys) = printed_sys {
                    let c = compare_with_printed(sys, fam, m);
                    let _ = writeln!(
                        text,
                        "  printed coefficients {:?}; coefficient gap {}; printed-matrix gap {:.3e}",
                        c.printed.coeffs,
                        c.coeff_gap.map_or("n/a".to_string(), |g| format!("{g:.3e}")),
                        c.jacobian_gap
                    );
                    entry["printed_comparison"] = serde_json::to_value(&c)?;
                }
            }
            AnalysisTarget::Matignon if stationary => {
                let alpha = require_alpha(cfg)?;
                let v = matignon_check(&(lin.pair.a + lin.pair.b), alpha);
                let _ = writeln!(text, "  alpha {}: {} ({})", alpha.value(), v.classification, v.evidence);
                entry["verdict"] = serde_json::to_value(&v)?;
            }
            AnalysisTarget::Roots if stationary => {
                let (region, grid) = region.expect("checked above");
                // ODE systems have B = 0, so the kernel does not enter
                let kernel = analysis_kernel(cfg)?.unwrap_or(Kernel::Dirac { tau: 1.0 });
                let alpha = match cfg.alpha {
                    Some(a) if cfg.system.is_fractional() => a,
                    _ => FracOrder::new(1.0)?,
                };
                let scan = scan_roots(&lin.pair, &kernel, alpha, region, grid)?;
                let _ = writeln!(
                    text,
                    "  {} roots: {}{}",
                    scan.roots.len(),
                    scan.roots.iter().map(fmt_c).collect::<Vec<_>>().join(", "),
                    if scan.purely_imaginary.is_empty() { "" } else { " (purely imaginary roots present)" }
                );
                entry["roots"] = serde_json::to_value(&scan)?;
                entry["eigenvalues_of_a"] = json!(eigenvalues(&lin.pair.a));
            }
            _ => {}
        }
        families.push(entry);
    }
    let json = json!({
        "config": cfg.to_json(),
        "target": target.as_str(),
        "families": families,
    });
    Ok(AnalysisReport { json, text })
}

/// Where the JSON report of `run_analyze` goes: the configured output when it
/// is a `.json` path, otherwise the configured path with its extension
/// replaced by `<target>.json`.
pub fn analysis_path(cfg: &ScenarioConfig, target: AnalysisTarget) -> Option<PathBuf> {
    let out = cfg.output.as_ref()?;
    Some(match out.format {
        OutputFormat::Json => out.path.clone(),
        OutputFormat::Csv => out.path.with_extension(format!("{}.json", target.as_str())),
    })
}

/// Runs an analysis, writes the JSON report when an output is configured and
/// returns both forms.
pub fn run_analyze(cfg: &ScenarioConfig, target: AnalysisTarget) -> Result<AnalysisReport> {
    let report = analyze(cfg, target)?;
    if let Some(path) = analysis_path(cfg, target) {
        let mut s = serde_json::to_string_pretty(&report.json)?;
        s.push('\n');
        std::fs::write(path, s)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn cfg(text: &str) -> ScenarioConfig {
        ScenarioConfig::parse(text, Path::new("t.cfg")).unwrap()
    }

    #[test]
    fn classical_equilibria_verdicts() {
        let r = analyze(&cfg("system = classical\nm = 1\n"), AnalysisTarget::Equilibria).unwrap();
        let fams = r.json["families"].as_array().unwrap();
        let verdicts: Vec<&str> = fams.iter().map(|f| f["verdict"]["classification"].as_str().unwrap()).collect();
        assert_eq!(verdicts, ["spectrally-stable-marginal", "unstable", "spectrally-stable-marginal"]);
    }

    #[test]
    fn literal10_charpoly_at_e1() {
        let r = analyze(&cfg("system = literal10\nm = 2\n"), AnalysisTarget::CharPoly).unwrap();
        let cp: Vec<f64> = serde_json::from_value(r.json["families"][0]["charpoly"].clone()).unwrap();
        assert_eq!(cp, vec![1.0, 0.0, 4.0, 0.0]);
    }

    #[test]
    fn literal38_first_family_is_skipped() {
        let r = analyze(&cfg("system = literal38\nm = 1\n"), AnalysisTarget::Equilibria).unwrap();
        assert!(r.json["families"][0]["verdict"].is_null());
        assert!(r.json["families"][0]["note"].is_string());
    }

    #[test]
    fn fractional_matignon_at_e3() {
        let r = analyze(&cfg("system = fractional\nalpha = 0.8\nm = 1\n"), AnalysisTarget::Matignon).unwrap();
        let v = &r.json["families"][2]["verdict"];
        assert_eq!(v["classification"], "spectrally-stable-marginal");
        assert_eq!(v["zero_eigenvalue_flag"], true);
    }

    #[test]
    fn roots_need_a_scan_region() {
        let c = cfg("system = delay\nm = 1\nkernel.type = dirac\nkernel.tau = 0.5\neps = 0.4,0.3,0.2,0.1\ndelta = 0.4,0.3,0.2,0.1\n");
        assert!(matches!(analyze(&c, AnalysisTarget::Roots), Err(Error::Config { .. })));
    }

    #[test]
    fn simulate_classical_and_delay() {
        let (t, scheme) = simulate(&cfg("system = classical\nx0 = 1,2,3\ndt = 1e-2\nt_end = 1\nmonitors = h1\n")).unwrap();
        assert_eq!((t.len(), scheme), (101, "rk4"));
        let (t, _) = simulate(&cfg(
            "system = delay-revised\nx0 = 0.3,0.2,0.1\ndt = 1e-2\nt_end = 1\nkernel.type = erlang\nkernel.alpha = 3\n\
             eps = 0.4,0.3,0.2,0.1\ndelta = 0.4,0.3,0.2,0.1\n",
        ))
        .unwrap();
        assert!(t.states.iter().all(StateVec::is_finite));
    }
}
