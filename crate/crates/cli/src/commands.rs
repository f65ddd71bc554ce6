use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use log::info;

use recsup::census::{self, CensusOptions};
use recsup::certify::{self, Decision};
use recsup::ensembles::EnsembleSpec;
use recsup::experiments::{self, ExperimentOptions};
use recsup::grow;
use recsup::{DenseMatrix, Error, NumericConfig, SupportPair};

use crate::{GlobalOpts, MatrixSource};

/// A definite failure of the computation itself (not of the input).
#[derive(Debug)]
struct DomainFailure(String);

impl std::fmt::Display for DomainFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DomainFailure {}

pub fn exit_code_for(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<DomainFailure>().is_some() {
        return 1;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Stuck { .. } | Error::Quadrature { .. } | Error::Internal(_)) => 1,
        _ => 2,
    }
}

fn numeric(g: &GlobalOpts) -> Result<NumericConfig> {
    let mut cfg = NumericConfig::default();
    if let Some(t) = g.tol_decision {
        if !(t.is_finite() && t >= 0.0) {
            bail!(Error::InvalidInput(format!("--tol-decision must be a nonnegative number, got {t}")));
        }
        cfg.decision_tol = t;
    }
    if let Some(t) = g.tol_rank {
        if !(t.is_finite() && t >= 0.0) {
            bail!(Error::InvalidInput(format!("--tol-rank must be a nonnegative number, got {t}")));
        }
        cfg.rank_rel_tol = Some(t);
    }
    Ok(cfg)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(Error::from)
        .with_context(|| format!("reading {}", path.display()))
}

fn write_out(g: &GlobalOpts, text: &str) -> Result<()> {
    if let Some(path) = &g.out {
        fs::write(path, text)
            .map_err(Error::from)
            .with_context(|| format!("writing {}", path.display()))?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn load_matrix(src: &MatrixSource) -> Result<DenseMatrix> {
    if let Some(path) = &src.matrix {
        let text = read(path)?;
        return DenseMatrix::parse_text(&text).with_context(|| format!("parsing {}", path.display()));
    }
    if src.ensemble.is_empty() {
        bail!(Error::InvalidInput("give --matrix FILE or --ensemble SPEC".into()));
    }
    let mut current: Option<DenseMatrix> = None;
    for raw in &src.ensemble {
        let spec: EnsembleSpec = raw.parse()?;
        if spec.needs_base() && current.is_none() {
            bail!(Error::InvalidInput(format!("{raw} needs a preceding matrix")));
        }
        current = Some(spec.build(current.as_ref())?);
    }
    Ok(current.expect("at least one spec"))
}

fn load_support(path: &Path, n: usize) -> Result<SupportPair> {
    let text = read(path)?;
    let p = SupportPair::parse_text(&text).with_context(|| format!("parsing {}", path.display()))?;
    p.check_bounds(n)?;
    Ok(p)
}

fn vector_text(v: &[f64]) -> Result<String> {
    Ok(DenseMatrix::new(v.len(), 1, v.to_vec())?.to_text())
}

pub fn verify(g: &GlobalOpts, src: &MatrixSource, support: &Path) -> Result<ExitCode> {
    let cfg = numeric(g)?;
    let a = load_matrix(src)?;
    let p = load_support(support, a.cols())?;
    let r = certify::certificate_value(&a, &p, &cfg)?;
    match (r.decision, r.lp_value) {
        (Decision::Recoverable, _) => println!("RECOVERABLE margin={:e}", r.margin),
        (Decision::NotRecoverable, Some(v)) => println!("NOT_RECOVERABLE value={v:e}"),
        (Decision::NotRecoverable, None) => println!("NOT_RECOVERABLE rank_deficient"),
        (Decision::Undecided, v) => {
            println!("UNDECIDED value={:e}", v.unwrap_or(f64::NAN));
        }
    }
    if let Some(w) = &r.certificate_w {
        write_out(g, &vector_text(w)?)?;
    }
    if g.strict && !r.decision.is_recoverable() {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn grow(g: &GlobalOpts, src: &MatrixSource, k: usize) -> Result<ExitCode> {
    let cfg = numeric(g)?;
    let a = load_matrix(src)?;
    let st = match grow::grow_support_traced(&a, k, g.seed, &cfg) {
        Ok(st) => st,
        Err(Error::Stuck { best, target, trials, .. }) => {
            println!("STUCK best {best}");
            return Err(DomainFailure(format!(
                "growth stopped at size {} of {target} after {trials} direction trials",
                best.len()
            ))
            .into());
        }
        Err(e) => return Err(e.into()),
    };
    println!("{}", st.support);
    println!("steps={} trials={}", st.iterations, st.trials);
    println!("VERIFIED");
    write_out(g, &st.support.to_text())?;
    Ok(ExitCode::SUCCESS)
}

pub fn shrink(g: &GlobalOpts, src: &MatrixSource, support: &Path, remove: usize) -> Result<ExitCode> {
    let cfg = numeric(g)?;
    let a = load_matrix(src)?;
    let p = load_support(support, a.cols())?;
    if remove == 0 || remove > a.cols() {
        bail!(Error::InvalidInput(format!("--remove takes a 1-based column index, got {remove}")));
    }
    let r = certify::certificate_value(&a, &p, &cfg)?;
    let w = match (r.decision, r.certificate_w) {
        (Decision::Recoverable, Some(w)) => w,
        _ => return Err(DomainFailure(format!("{p} is not recoverable")).into()),
    };
    let (smaller, _) = certify::shrink_support(&a, &p, &w, remove - 1, &cfg)?;
    if !certify::is_recoverable(&a, &smaller, &cfg)? {
        return Err(anyhow!(Error::Internal(format!("{smaller} failed re-verification"))));
    }
    println!("{smaller}");
    println!("VERIFIED");
    write_out(g, &smaller.to_text())?;
    Ok(ExitCode::SUCCESS)
}

pub fn generate(g: &GlobalOpts, src: &MatrixSource) -> Result<ExitCode> {
    let a = load_matrix(src)?;
    if g.out.is_some() {
        write_out(g, &a.to_text())?;
        println!("generated {} x {} matrix", a.rows(), a.cols());
    } else {
        print!("{}", a.to_text());
    }
    Ok(ExitCode::SUCCESS)
}

pub fn census(
    g: &GlobalOpts,
    src: &MatrixSource,
    kmax: usize,
    allow_large: bool,
    checkpoint: Option<PathBuf>,
) -> Result<ExitCode> {
    let cfg = numeric(g)?;
    let a = load_matrix(src)?;
    let opts = CensusOptions {
        numeric: cfg,
        allow_large,
        workers: g.workers,
        checkpoint,
        ..Default::default()
    };
    let curve = census::enumerate_lambda(&a, kmax, &opts)?;
    println!("{:>3} {:>12} {:>12}  ratio", "k", "count", "total");
    for (k, c) in &curve.counts {
        let ratio = curve.ratio_f64(*k).map(|r| format!("{r:.6}")).unwrap_or_default();
        println!("{k:>3} {c:>12} {:>12}  {ratio}", curve.totals[k]);
    }
    if curve.undecided > 0 {
        println!("undecided pairs: {}", curve.undecided);
    }
    println!(
        "even={} nonincreasing={}",
        curve.all_even(),
        curve.normalized_nonincreasing()
    );
    write_out(g, &curve.to_csv())?;
    Ok(ExitCode::SUCCESS)
}

pub fn bounds(g: &GlobalOpts, m: usize, n: usize, k: usize) -> Result<ExitCode> {
    let mut rows: Vec<(String, String, String)> = Vec::new();
    let mut push = |name: &str, value: String, note: String| rows.push((name.into(), value, note));

    match census::heuristic_xi_bound(n, k) {
        Ok(v) => push("heuristic_xi_bound", v.to_string(), format!("n={n} k={k}")),
        Err(e) => push("heuristic_xi_bound", String::new(), e.to_string()),
    }
    match census::xi_maximal(n) {
        Ok(v) => push("xi_maximal", v.to_string(), format!("Xi(n-1,n,n-1), n={n}")),
        Err(e) => push("xi_maximal", String::new(), e.to_string()),
    }
    if m + 1 == n {
        if let Ok(xi) = census::xi_maximal(n) {
            match census::xi_size_m_minus_1(m, n, &xi) {
                Ok(v) => push("xi_size_m_minus_1", v.to_string(), format!("Xi({m},{n},{})", m - 1)),
                Err(e) => push("xi_size_m_minus_1", String::new(), e.to_string()),
            }
        }
    }
    match census::mb_lambda_maximal(n) {
        Ok(v) => push("mb_lambda_maximal", v.to_string(), format!("Mercedes-Benz frame, n={n}")),
        Err(e) => push("mb_lambda_maximal", String::new(), e.to_string()),
    }
    for rec in [
        census::xi_coherence_regime(m, n, k),
        census::donoho_necessary_bound(m, n),
        census::regular_section_lower_bound(k),
    ] {
        let value = rec.value.map(|v| v.to_string()).unwrap_or_default();
        let note = format!(
            "{}; {}",
            if rec.applicable { "applicable" } else { "not applicable" },
            rec.reason
        );
        push(&rec.kind.to_string(), value, note);
    }
    match census::expected_gaussian_maximal(m, n) {
        Ok((exact, lower)) => {
            push("expected_gaussian_maximal", format!("{exact:.10e}"), "quadrature".into());
            push("expected_gaussian_lower", format!("{lower:.10e}"), "arctan form".into());
        }
        Err(e) => push("expected_gaussian_maximal", String::new(), e.to_string()),
    }

    let mut csv = String::from("name,value,note\n");
    for (name, value, note) in &rows {
        println!("{name:<28} {value:>20}  {note}");
        writeln!(csv, "{name},{value},\"{}\"", note.replace('"', "'")).expect("write to string");
    }
    write_out(g, &csv)?;
    Ok(ExitCode::SUCCESS)
}

pub fn sample(g: &GlobalOpts, src: &MatrixSource, k: usize, trials: usize) -> Result<ExitCode> {
    let cfg = numeric(g)?;
    let a = load_matrix(src)?;
    let opts = ExperimentOptions { numeric: cfg, workers: g.workers };
    let (fraction, records) = experiments::sample_recoverability(&a, k, trials, g.seed, &opts)?;
    let hits = records.iter().filter(|r| r.recoverable).count();
    println!("fraction={fraction} successes={hits}/{trials}");
    let mut csv = String::from("trial,indices,signs,recoverable\n");
    for r in &records {
        let idx: Vec<String> = r.pair.indices().iter().map(|i| (i + 1).to_string()).collect();
        let signs: Vec<String> = r.pair.sign_values().iter().map(|s| format!("{s:+}")).collect();
        writeln!(csv, "{},{},{},{}", r.trial, idx.join(" "), signs.join(" "), r.recoverable)
            .expect("write to string");
    }
    write_out(g, &csv)?;
    Ok(ExitCode::SUCCESS)
}

/// Largest grid width run without --allow-large.
const LARGE_GRID: usize = 400;

pub fn phase_grid(
    g: &GlobalOpts,
    n: usize,
    delta_steps: usize,
    rho_steps: usize,
    trials: usize,
    bp: bool,
    allow_large: bool,
) -> Result<ExitCode> {
    if n > LARGE_GRID && !allow_large {
        bail!("n = {n} exceeds {LARGE_GRID}; pass --allow-large to run it");
    }
    let cfg = numeric(g)?;
    let opts = ExperimentOptions { numeric: cfg, workers: g.workers };
    let records = experiments::phase_grid(n, delta_steps, rho_steps, trials, g.seed, bp, &opts)?;
    println!("{:>7} {:>7} {:>5} {:>5} {:>9} {:>9}", "delta", "rho", "m", "k", "cert", "bp");
    for r in &records {
        let bp_frac = r
            .successes_bp
            .map(|s| format!("{:.3}", s as f64 / r.trials as f64))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:>7.3} {:>7.3} {:>5} {:>5} {:>9.3} {:>9}",
            r.delta,
            r.rho,
            r.m,
            r.k,
            r.fraction_cert(),
            bp_frac
        );
    }
    if bp && trials > 0 {
        let cert: f64 = records.iter().filter_map(|r| r.mean_time_cert_s).sum::<f64>() / records.len() as f64;
        let lp: f64 = records.iter().filter_map(|r| r.mean_time_bp_s).sum::<f64>() / records.len() as f64;
        println!("mean time per trial: certificate {cert:.3e} s, basis pursuit {lp:.3e} s");
    }
    write_out(g, &experiments::phase_grid_csv(&records))?;
    Ok(ExitCode::SUCCESS)
}

pub fn cross_validate(
    g: &GlobalOpts,
    src: &MatrixSource,
    support: Option<&Path>,
    trials: usize,
    k: Option<usize>,
) -> Result<ExitCode> {
    let cfg = numeric(g)?;
    let outcomes = if let Some(path) = support {
        let a = load_matrix(src)?;
        let p = load_support(path, a.cols())?;
        vec![experiments::cross_validate(&a, &p, g.seed, &cfg)?]
    } else {
        let (m, n) = match src.ensemble.as_slice() {
            [one] => match one.parse::<EnsembleSpec>()? {
                EnsembleSpec::Gaussian { m, n, .. } => (m, n),
                _ => bail!(Error::InvalidInput(
                    "random cross-validation needs a single gaussian ensemble".into()
                )),
            },
            _ => bail!(Error::InvalidInput(
                "give --support FILE, or a single --ensemble gaussian:m=M,n=N".into()
            )),
        };
        let opts = ExperimentOptions { numeric: cfg, workers: g.workers };
        experiments::cross_validation_study(m, n, k, trials, g.seed, &opts)?
    };

    let mut csv = String::from("trial,k,cert,bp_agrees,bp_status,t_cert_s,t_bp_s\n");
    let mut mismatches = 0usize;
    for (t, o) in outcomes.iter().enumerate() {
        let agrees = o.bp_agrees.map(|b| b.to_string()).unwrap_or_default();
        if o.bp_agrees != Some(o.cert_decision) {
            mismatches += 1;
            println!(
                "trial {t} (seed {}): cert={} bp_agrees={} status={:?}",
                g.seed, o.cert_decision, agrees, o.bp_status
            );
        }
        writeln!(
            csv,
            "{t},{},{},{},{:?},{:.6e},{:.6e}",
            o.pair.len(),
            o.cert_decision,
            agrees,
            o.bp_status,
            o.cert_time_s,
            o.bp_time_s
        )
        .expect("write to string");
    }
    if let [o] = outcomes.as_slice() {
        println!(
            "cert={} bp={} t_cert={:.3e}s t_bp={:.3e}s",
            if o.cert_decision { "RECOVERABLE" } else { "NOT_RECOVERABLE" },
            match o.bp_agrees {
                Some(true) => "AGREES",
                Some(false) => "DIFFERS",
                None => "FAILED",
            },
            o.cert_time_s,
            o.bp_time_s
        );
    } else {
        let total = outcomes.len();
        println!(
            "agreement={}/{} recoverable={}",
            total - mismatches,
            total,
            outcomes.iter().filter(|o| o.cert_decision).count()
        );
    }
    write_out(g, &csv)?;
    if g.strict && mismatches > 0 {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
