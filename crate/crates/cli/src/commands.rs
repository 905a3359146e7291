use std::fs;

use noisecube::concentration::{
    azuma_mcdiarmid_check, blowing_up_check, blowup_corollary_check, doob_martingale,
    distance_table, hoeffding_lemma_check, BoundedDiffSpec,
};
use noisecube::cube::{hamming_ball, product_measure};
use noisecube::entcurve::{bound_row, sample_curve};
use noisecube::fourier::{hyper_check, nazarov_certificate, wht};
use noisecube::harness::{
    exhaustive_worst_case, make_family, strong_bound_trial_labeled, weak_bound_trial_labeled,
    GridConfig, HarnessRow,
};
use noisecube::rng::trial_stream;
use noisecube::shannon::{tensor_bound_check, ProbVector};
use noisecube::CubeSet;
use rand::Rng;
use thiserror::Error;

use crate::table::Table;
use crate::{Command, Opts};

/// Noise levels plotted by `curve` when `--tau` is absent.
pub const DEFAULT_CURVE_TAUS: [f64; 6] = [0.001, 0.01, 0.05, 0.1, 0.2, 0.3];
/// Panels of the bound comparison when `--tau` is absent.
pub const DEFAULT_BOUND_TAUS: [f64; 2] = [0.02, 0.05];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] noisecube::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

type Result<T> = std::result::Result<T, CliError>;

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn run(command: Command, o: &Opts) -> Result<Table> {
    match command {
        Command::Curve => curve(o),
        Command::Bounds => bounds(o),
        Command::VerifyTensor => verify_tensor(o),
        Command::VerifyNazarov => verify_nazarov(o),
        Command::VerifyHyper => verify_hyper(o),
        Command::VerifyConcentration => verify_concentration(o),
        Command::VerifyBlowup => verify_blowup(o),
        Command::Harness => harness(o),
        Command::Worstcase => worstcase(o),
        Command::WhtSelftest => wht_selftest(o),
    }
}

fn one_tau(o: &Opts, default: f64) -> Result<f64> {
    match o.tau.as_slice() {
        [] => Ok(default),
        [t] => Ok(*t),
        _ => Err(config("this command takes a single --tau")),
    }
}

fn taus_or(o: &Opts, default: &[f64]) -> Vec<f64> {
    if o.tau.is_empty() {
        default.to_vec()
    } else {
        o.tau.clone()
    }
}

fn dim(o: &Opts, default: u32, max: u32) -> Result<u32> {
    let n = o.n.unwrap_or(default);
    if (1..=max).contains(&n) {
        Ok(n)
    } else {
        Err(config(format!("--n {n} is outside 1..={max} for this command")))
    }
}

fn read(path: &std::path::Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn load_grid(o: &Opts) -> Result<GridConfig> {
    let mut grid = match &o.family {
        Some(path) => GridConfig::from_toml(&read(path)?)?,
        None => GridConfig::default_grid(),
    };
    if let Some(n) = o.n {
        grid.n = vec![n];
    }
    if !o.tau.is_empty() {
        grid.tau = o.tau.clone();
    }
    Ok(grid)
}

/// `(label, set, tau)` cases: a single `--set` file, or the family grid.
fn set_cases(o: &Opts) -> Result<Vec<(String, CubeSet, f64)>> {
    if let Some(path) = &o.set {
        let set = CubeSet::from_hex(&read(path)?)?;
        return Ok(taus_or(o, &[0.1]).into_iter().map(|t| (path.display().to_string(), set.clone(), t)).collect());
    }
    let grid = load_grid(o)?;
    grid.cases().map(|(f, n, t)| Ok((f.to_string(), make_family(f, n)?, t))).collect()
}

fn curve(o: &Opts) -> Result<Table> {
    let grid = o.grid.unwrap_or(100);
    let mut t = Table::new(&["tau", "p", "alpha", "beta"]);
    for tau in taus_or(o, &DEFAULT_CURVE_TAUS) {
        for pt in sample_curve(tau, grid)? {
            t.push(vec![tau.into(), pt.p.into(), pt.alpha.into(), pt.beta.into()]);
        }
    }
    Ok(t)
}

fn bounds(o: &Opts) -> Result<Table> {
    let betas: Vec<f64> = match (o.beta, o.beta_grid) {
        (Some(b), None) => vec![b],
        (None, step) => {
            let step = step.unwrap_or(0.01);
            if !(step > 0.0 && step <= 0.5) {
                return Err(config(format!("--beta-grid {step} is outside (0, 1/2]")));
            }
            (1..).map(|k| k as f64 * step).take_while(|&b| b < 1.0 - 1e-12).collect()
        }
        (Some(_), Some(_)) => return Err(config("--beta and --beta-grid are exclusive")),
    };
    let mut t = Table::new(&["tau", "beta", "alpha_opt", "alpha_hyper", "alpha_fourier", "hyper_vacuous"]);
    for tau in taus_or(o, &DEFAULT_BOUND_TAUS) {
        for &beta in &betas {
            let row = bound_row(beta, tau)?;
            t.push(vec![
                tau.into(),
                beta.into(),
                row.alpha_opt.into(),
                row.alpha_hyper.into(),
                row.alpha_fourier.into(),
                row.hyper_vacuous().into(),
            ]);
        }
    }
    Ok(t)
}

fn verify_tensor(o: &Opts) -> Result<Table> {
    let n = dim(o, 8, 16)?;
    let tau = one_tau(o, 0.1)?;
    let mut t = Table::checked(&["trial", "n", "tau", "h_in", "h_out", "h_bound", "holds"], "holds");
    for trial in 0..o.trials.unwrap_or(1000) {
        let p = ProbVector::<f64>::random(n, &mut trial_stream(o.seed, trial as u64))?;
        let c = tensor_bound_check(&p, tau)?;
        t.push(vec![trial.into(), n.into(), tau.into(), c.h_in.into(), c.h_out.into(), c.h_bound.into(), c.holds.into()]);
    }
    Ok(t)
}

fn verify_nazarov(o: &Opts) -> Result<Table> {
    let mut t = Table::checked(
        &[
            "family", "n", "tau", "eps", "d", "low_part_max", "high_part_norm", "high_part_bound",
            "mu_b", "mu_a", "rhs", "vacuous", "holds",
        ],
        "holds",
    );
    for (label, b, tau) in set_cases(o)? {
        let eps = o.eps.unwrap_or(1.0 / b.n() as f64);
        let c = nazarov_certificate(&b, tau, eps)?;
        t.push(vec![
            label.into(),
            b.n().into(),
            tau.into(),
            eps.into(),
            c.d.into(),
            c.low_part_max.into(),
            c.high_part_norm.into(),
            c.high_part_bound.into(),
            c.mu_b.into(),
            c.mu_a.into(),
            c.rhs.into(),
            c.vacuous.into(),
            c.all_clauses_hold().into(),
        ]);
    }
    Ok(t)
}

fn random_table<R: Rng>(len: usize, rng: &mut R) -> Vec<f64> {
    let power = rng.random_range(1..=6);
    (0..len).map(|_| rng.random::<f64>().powi(power)).collect()
}

fn verify_hyper(o: &Opts) -> Result<Table> {
    let n = dim(o, 10, 16)?;
    let tau = one_tau(o, 0.1)?;
    if !(tau > 0.0 && tau < 0.5) {
        return Err(config(format!("--tau {tau} is outside (0, 1/2)")));
    }
    let rho = 1.0 - 2.0 * tau;
    let mut t = Table::checked(&["trial", "r", "s", "lhs", "rhs", "holds"], "holds");
    for trial in 0..o.trials.unwrap_or(1000) {
        let mut rng = trial_stream(o.seed, trial as u64);
        let f = random_table(1 << n, &mut rng);
        let g = random_table(1 << n, &mut rng);
        let (r, s) = if o.random_rs { random_exponents(rho, &mut rng) } else { (rho, rho) };
        let c = hyper_check(&f, &g, tau, r, s)?;
        t.push(vec![trial.into(), r.into(), s.into(), c.lhs.into(), c.rhs.into(), c.holds.into()]);
    }
    Ok(t)
}

/// `(r, s)` with `rho <= √(rs) <= 1`.
pub fn random_exponents<R: Rng>(rho: f64, rng: &mut R) -> (f64, f64) {
    let root = rho + (1.0 - rho) * rng.random::<f64>();
    let skew = root.ln() * (2.0 * rng.random::<f64>() - 1.0);
    let r = root * skew.exp();
    (r, root * root / r)
}

fn verify_concentration(o: &Opts) -> Result<Table> {
    let n = dim(o, 12, 16)?;
    let mut t = Table::checked(&["check", "param", "value", "bound", "holds"], "holds");
    for trial in 0..o.trials.unwrap_or(1000) {
        let mut rng = trial_stream(o.seed, trial as u64);
        let k = rng.random_range(1..=8);
        let c = rng.random_range(0.1..=4.0);
        let values: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..=c)).collect();
        let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = w.iter().sum();
        let masses: Vec<f64> = w.iter().map(|v| v / total).collect();
        let h = hoeffding_lemma_check(&values, &masses, c)?;
        t.push(vec!["hoeffding".into(), (trial as f64).into(), h.lhs.into(), h.rhs.into(), h.holds.into()]);
    }

    let sum: Vec<f64> = (0..1usize << n).map(|x| x.count_ones() as f64).collect();
    let fair = BoundedDiffSpec::fair(n)?;
    for zi in 0..=2 * n {
        let z = zi as f64 / 2.0;
        let c = azuma_mcdiarmid_check(&sum, &fair, z)?;
        t.push(vec!["binomial".into(), z.into(), c.prob.into(), c.bound.into(), c.holds.into()]);
    }

    let biases = if o.tau_list.is_empty() { vec![one_tau(o, 0.1)?; n as usize] } else { o.tau_list.clone() };
    let spec = BoundedDiffSpec::new(biases, vec![1.0; n as usize])?;
    let mut rng = trial_stream(o.seed, u64::MAX);
    let mut b = CubeSet::from_fn(n, |_| rng.random::<f64>() < 0.002)?;
    if b.is_empty() {
        b = CubeSet::singleton(n, 0)?;
    }
    let dist: Vec<f64> = distance_table(&b)?;
    let neg: Vec<f64> = dist.iter().map(|v| -v).collect();
    let trace = doob_martingale(&dist, &spec)?;
    let defect = trace.martingale_defect();
    t.push(vec!["martingale".into(), 0.0.into(), defect.into(), 1e-12.into(), (defect <= 1e-12).into()]);
    for z in 0..=n {
        let z = z as f64;
        let up = azuma_mcdiarmid_check(&dist, &spec, z)?;
        t.push(vec!["distance_upper".into(), z.into(), up.prob.into(), up.bound.into(), up.holds.into()]);
        let down = azuma_mcdiarmid_check(&neg, &spec, z)?;
        t.push(vec!["distance_lower".into(), z.into(), down.prob.into(), down.bound.into(), down.holds.into()]);
    }
    Ok(t)
}

fn sparse_set<R: Rng>(n: u32, rng: &mut R) -> Result<CubeSet> {
    let density = 10f64.powf(-1.0 - 3.0 * rng.random::<f64>());
    let set = CubeSet::from_fn(n, |_| rng.random::<f64>() < density)?;
    Ok(if set.is_empty() { CubeSet::singleton(n, rng.random_range(0..1usize << n))? } else { set })
}

fn verify_blowup(o: &Opts) -> Result<Table> {
    let n = dim(o, 16, 20)?;
    if n < 2 {
        return Err(config("verify-blowup needs --n >= 2"));
    }
    let tau = one_tau(o, 0.1)?;
    let trials = o.trials.unwrap_or(1000);
    let mut t = Table::checked(&["check", "trial", "mu_b", "value", "bound", "vacuous", "holds"], "holds");
    for trial in 0..trials {
        let mut rng = trial_stream(o.seed, trial as u64);
        let bias: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let b = sparse_set(n, &mut rng)?;
        let b2 = sparse_set(n, &mut rng)?;
        let c = blowing_up_check(&b, &b2, &bias)?;
        let mu = product_measure(&b, &bias)?;
        t.push(vec![
            "pair".into(),
            trial.into(),
            mu.into(),
            (c.dist as f64).into(),
            c.bound.into(),
            false.into(),
            c.holds.into(),
        ]);
    }
    for trial in 0..trials.div_ceil(10) {
        let mut rng = trial_stream(o.seed ^ 0x5eed, trial as u64);
        let centre = rng.random_range(0..1usize << n);
        let radius = rng.random_range(0..=n / 4);
        let b = hamming_ball(n, centre, radius)?.union(&sparse_set(n, &mut rng)?)?;
        let shift = rng.random_range(0..1usize << n);
        let c = blowup_corollary_check(&b, tau, shift)?;
        t.push(vec![
            "corollary".into(),
            trial.into(),
            c.mu_b.into(),
            c.mu_bd.into(),
            (1.0 - 1.0 / n as f64).into(),
            c.vacuous.into(),
            c.holds.into(),
        ]);
    }
    Ok(t)
}

fn push_harness_row(t: &mut Table, trial: &str, r: HarnessRow<f64>) {
    t.push(vec![
        r.family.into(),
        trial.into(),
        r.n.into(),
        r.tau.into(),
        r.theta.into(),
        r.log2_b.into(),
        r.log2_a.into(),
        r.beta_pred.into(),
        r.slack_used.into(),
        r.vacuous.into(),
        r.step1_ok.into(),
        r.verdict.into(),
    ]);
}

fn harness(o: &Opts) -> Result<Table> {
    let mut t = Table::checked(
        &[
            "family", "trial", "n", "tau", "theta", "log2_b", "log2_a", "beta_pred", "slack_used",
            "vacuous", "step1_ok", "verdict",
        ],
        "verdict",
    );
    for (label, b, tau) in set_cases(o)? {
        push_harness_row(&mut t, "weak", weak_bound_trial_labeled(&b, tau, label.clone())?);
        if b.n() >= 2 {
            push_harness_row(&mut t, "strong", strong_bound_trial_labeled(&b, tau, label)?);
        }
    }
    Ok(t)
}

fn worstcase(o: &Opts) -> Result<Table> {
    let n = dim(o, 3, 4)?;
    let tau = one_tau(o, 0.1)?;
    let theta = o.theta.unwrap_or(if n == 1 { 0.5 } else { 1.0 - 1.0 / n as f64 });
    let w = exhaustive_worst_case(n, tau, theta)?;
    let mut t = Table::new(&["n", "tau", "theta", "size_b", "log2_b", "log2_a"]);
    for p in &w.frontier {
        t.push(vec![n.into(), tau.into(), theta.into(), p.size_b.into(), p.log2_b.into(), p.log2_a.into()]);
    }
    if let Some(k) = w.frontier_violations.filter(|&k| k > 0) {
        t.note_violation(format!("{k} frontier points break the weak inequality"));
    }
    if w.weak_violations > 0 {
        t.note_violation(format!("{} subsets fail the weak trial", w.weak_violations));
    }
    if w.strong_violations > 0 {
        t.note_violation(format!("{} subsets fail the strong trial", w.strong_violations));
    }
    Ok(t)
}

fn wht_selftest(o: &Opts) -> Result<Table> {
    let max_n = dim(o, 16, 20)?;
    let mut t = Table::checked(&["n", "roundtrip_err", "parseval_err", "holds"], "holds");
    for n in 1..=max_n {
        let mut rng = trial_stream(o.seed, n as u64);
        let f: Vec<f64> = (0..1usize << n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let spectrum = wht(&f)?;
        let back = spectrum.inverse();
        let roundtrip = f.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let mean_sq = f.iter().map(|v| v * v).sum::<f64>() / f.len() as f64;
        let parseval = (mean_sq - spectrum.energy()).abs();
        t.push(vec![n.into(), roundtrip.into(), parseval.into(), (roundtrip <= 1e-10 && parseval <= 1e-10).into()]);
    }
    Ok(t)
}
