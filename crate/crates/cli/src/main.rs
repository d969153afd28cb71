//! `entangle-order`: convertibility analyses of bipartite pure states.
//!
//! Exit codes: 0 definite result, 1 input or usage error, 2 inconclusive.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use entangle_order::family::{validate_family, FamilyValidation, ValidationPlan, DEFAULT_REFINE_ROUNDS};
use entangle_order::formats::{load_state, windows_csv, FamilyDescriptor, PosetSpec, StateInput};
use entangle_order::log_oscillation::{reproduce_incomparability, MemberOutcome, ReproduceConfig};
use entangle_order::order::{random_law_trials, verify_monotone_laws, LawReport, RandomLawConfig, RandomLawSummary};
use entangle_order::slocc::{
    certify_incomparable, locc_convertible, max_conversion_probability, ratio_trend_pair, slocc_convertible_finite,
    Certification, Schedule, TrendReport, Verdict, DEFAULT_HORIZON_DECADES, DEFAULT_SAMPLES_PER_UNIT,
};
use entangle_order::spectra::{validate_tail, IndexRange, ValidityReport};
use entangle_order::Exec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const INCONCLUSIVE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "entangle-order", version, about = "Convertibility ordering of bipartite pure states")]
struct Cli {
    /// Directory for file outputs.
    #[arg(long, global = true, env = "ENTANGLE_ORDER_OUT", default_value = ".")]
    out_dir: PathBuf,
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check positivity, monotonicity, convexity and normalization of a tail.
    Validate {
        file: PathBuf,
        /// Largest index sampled for closed-form tails.
        #[arg(long, default_value_t = 1_000_000)]
        max_n: u64,
        #[arg(long, default_value_t = 64)]
        per_decade: usize,
    },
    /// Decide convertibility between two states, both directions.
    Convert {
        psi: PathBuf,
        phi: PathBuf,
        #[arg(long, value_enum, default_value_t = Regime::Slocc)]
        regime: Regime,
        #[arg(long, default_value_t = DEFAULT_HORIZON_DECADES, value_parser = clap::value_parser!(u32).range(1..=6))]
        horizon: u32,
        #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_UNIT)]
        samples_per_unit: f64,
    },
    /// Certify incomparability of the squeezed state and the log-oscillating
    /// family, and estimate its monotone pair.
    ReproducePaper {
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        r_lo: f64,
        #[arg(long, default_value_t = 2.0)]
        r_hi: f64,
        #[arg(long, default_value_t = DEFAULT_HORIZON_DECADES, value_parser = clap::value_parser!(u32).range(1..=6))]
        horizon: u32,
        #[arg(long, default_value_t = 5)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_UNIT)]
        samples_per_unit: f64,
    },
    /// Verify the monotone laws on a poset file or on random posets.
    Poset {
        /// Poset JSON with a chain; omit with --random.
        file: Option<PathBuf>,
        /// Random monotones drawn per poset.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random posets instead of a file.
        #[arg(long, conflicts_with = "file")]
        random: Option<usize>,
        #[arg(long, default_value_t = 8)]
        max_elements: usize,
    },
    /// Check member validity, ordering and separation of a tail family.
    FamilyCheck {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_HORIZON_DECADES, value_parser = clap::value_parser!(u32).range(1..=6))]
        horizon: u32,
        #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_UNIT)]
        samples_per_unit: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_n: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum Regime {
    Locc,
    Slocc,
}

#[derive(Serialize)]
struct Report<C: Serialize, R: Serialize> {
    command: &'static str,
    config: C,
    result: R,
}

fn emit<C: Serialize, R: Serialize>(command: &'static str, config: C, result: R) -> Result<String> {
    let text = serde_json::to_string_pretty(&Report { command, config, result })?;
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    Ok(text)
}

fn exec(cli: &Cli) -> Exec {
    if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn schedule(decades: u32, samples_per_unit: f64, exec: Exec) -> Result<Schedule> {
    if !(samples_per_unit > 0.0 && samples_per_unit.is_finite()) {
        bail!("--samples-per-unit must be positive");
    }
    Ok(Schedule {
        decades,
        samples_per_unit,
        exec,
    })
}

fn load(path: &Path) -> Result<StateInput> {
    Ok(load_state(path)?)
}

#[derive(Serialize)]
struct ValidateConfig<'a> {
    file: &'a Path,
    max_n: u64,
    per_decade: usize,
}

#[derive(Serialize)]
struct ValidateResult {
    input: &'static str,
    report: ValidityReport,
}

fn cmd_validate(file: &Path, max_n: u64, per_decade: usize) -> Result<u8> {
    let state = load(file)?;
    let tail = state.tail();
    let range = match tail.rank() {
        Some(rank) => IndexRange::upto(rank as u64 + 2),
        None => IndexRange::geometric(max_n, per_decade.max(1)),
    };
    let input = match &state {
        StateInput::Spectrum { .. } => "spectrum",
        StateInput::Tail { tail } if tail.is_finite() => "tail",
        StateInput::Tail { .. } => "generator",
    };
    let report = validate_tail(&tail, &range);
    emit(
        "validate",
        ValidateConfig { file, max_n, per_decade },
        ValidateResult { input, report },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct ConvertConfig<'a> {
    psi: &'a Path,
    phi: &'a Path,
    regime: Regime,
    horizon_decades: u32,
    samples_per_unit: f64,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ConvertResult {
    Finite {
        forward: bool,
        backward: bool,
        probability_forward: f64,
        probability_backward: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        trend_forward: Option<TrendReport>,
        #[serde(skip_serializing_if = "Option::is_none")]
        trend_backward: Option<TrendReport>,
    },
    Generated {
        forward: Verdict,
        backward: Verdict,
        incomparable: bool,
        certification: Certification,
    },
}

fn cmd_convert(cfg: ConvertConfig<'_>, exec: Exec) -> Result<u8> {
    let psi = load(cfg.psi)?;
    let phi = load(cfg.phi)?;
    let sched = schedule(cfg.horizon_decades, cfg.samples_per_unit, exec)?;
    let (result, code) = match (psi.spectrum(), phi.spectrum(), cfg.regime) {
        (Some(a), Some(b), regime) => {
            let (forward, backward, trends) = match regime {
                Regime::Locc => (locc_convertible(a, b), locc_convertible(b, a), None),
                Regime::Slocc => {
                    let (f, r) = ratio_trend_pair(&psi.tail(), &phi.tail(), &sched)?;
                    (slocc_convertible_finite(a, b), slocc_convertible_finite(b, a), Some((f, r)))
                }
            };
            let (trend_forward, trend_backward) = trends.unzip();
            (
                ConvertResult::Finite {
                    forward,
                    backward,
                    probability_forward: max_conversion_probability(a, b),
                    probability_backward: max_conversion_probability(b, a),
                    trend_forward,
                    trend_backward,
                },
                0,
            )
        }
        (_, _, Regime::Locc) => bail!("LOCC convertibility needs two finite spectra"),
        _ if psi.is_finite() || phi.is_finite() => {
            bail!("unsupported combination: SLOCC trend needs both states finite or both generated")
        }
        _ => {
            let c = certify_incomparable(&psi.tail(), &phi.tail(), &sched)?;
            let (f, b) = c.reports();
            let inconclusive = f.verdict == Verdict::Inconclusive || b.verdict == Verdict::Inconclusive;
            (
                ConvertResult::Generated {
                    forward: f.verdict,
                    backward: b.verdict,
                    incomparable: c.is_certified(),
                    certification: c.clone(),
                },
                if inconclusive { INCONCLUSIVE } else { 0 },
            )
        }
    };
    emit("convert", cfg, result)?;
    Ok(code)
}

#[derive(Serialize)]
struct MemberSummary {
    r: f64,
    certified: bool,
    forward: Verdict,
    backward: Verdict,
}

#[derive(Serialize)]
struct ReproduceSummary {
    reproduced: bool,
    shift: f64,
    r_minus_hat: f64,
    r_plus_hat: f64,
    members: Vec<MemberSummary>,
    family_conditions: [bool; 3],
    files: Vec<String>,
}

#[derive(Serialize)]
struct ReproduceRunConfig<'a> {
    #[serde(flatten)]
    reproduce: &'a ReproduceConfig,
    exec: Exec,
    out_dir: &'a Path,
}

fn member_summary(m: &MemberOutcome) -> MemberSummary {
    let (f, b) = m.certification.reports();
    MemberSummary {
        r: m.r,
        certified: m.certification.is_certified(),
        forward: f.verdict,
        backward: b.verdict,
    }
}

fn cmd_reproduce(config: ReproduceConfig, out_dir: &Path) -> Result<u8> {
    if !(config.q > 0.0 && config.q < 1.0) {
        bail!("--q must lie in (0, 1)");
    }
    if !(config.r_lo > 0.0 && config.r_lo <= config.r_hi) {
        bail!("need 0 < --r-lo <= --r-hi (got {} and {})", config.r_lo, config.r_hi);
    }
    if config.grid_points == 0 {
        bail!("--grid must be at least 1");
    }
    let rep = reproduce_incomparability(&config)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut files = Vec::new();
    let bundle = out_dir.join("reproduction.json");
    fs::write(&bundle, serde_json::to_string_pretty(&rep)?).with_context(|| format!("writing {}", bundle.display()))?;
    files.push(bundle.display().to_string());
    for m in &rep.members {
        let (f, b) = m.certification.reports();
        for (tag, report) in [("psi_to_xi", f), ("xi_to_psi", b)] {
            let path = out_dir.join(format!("windows_r{}_{tag}.csv", m.r));
            fs::write(&path, windows_csv(&report.windows)).with_context(|| format!("writing {}", path.display()))?;
            files.push(path.display().to_string());
        }
    }
    let summary = ReproduceSummary {
        reproduced: rep.reproduced,
        shift: rep.family.shift,
        r_minus_hat: rep.estimate.r_minus_hat,
        r_plus_hat: rep.estimate.r_plus_hat,
        members: rep.members.iter().map(member_summary).collect(),
        family_conditions: [
            rep.validation.condition_i,
            rep.validation.condition_ii,
            rep.validation.condition_iii,
        ],
        files,
    };
    emit(
        "reproduce-paper",
        ReproduceRunConfig {
            reproduce: &config,
            exec: config.exec,
            out_dir,
        },
        summary,
    )?;
    Ok(if rep.reproduced { 0 } else { INCONCLUSIVE })
}

#[derive(Serialize)]
struct PosetConfig<'a> {
    file: Option<&'a Path>,
    trials: usize,
    seed: u64,
    random: Option<usize>,
    max_elements: usize,
}

#[derive(Serialize)]
#[serde(untagged)]
enum PosetResult {
    File { holds: bool, labels: Vec<String>, report: LawReport },
    Random { holds: bool, summary: RandomLawSummary },
}

fn cmd_poset(cfg: PosetConfig<'_>, exec: Exec) -> Result<u8> {
    let result = match (cfg.file, cfg.random) {
        (_, Some(n)) => {
            if cfg.max_elements == 0 {
                bail!("--max-elements must be at least 1");
            }
            let summary = random_law_trials(&RandomLawConfig {
                trials: n,
                max_elements: cfg.max_elements,
                monotones_per_trial: cfg.trials,
                seed: cfg.seed,
                exec,
                ..RandomLawConfig::default()
            });
            PosetResult::Random {
                holds: summary.violations == 0,
                summary,
            }
        }
        (Some(path), None) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let spec = PosetSpec::parse(&text).with_context(|| path.display().to_string())?;
            let (poset, chain) = spec.build().with_context(|| path.display().to_string())?;
            let Some(chain) = chain else {
                bail!("{}: poset has no \"chain\"", path.display());
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let report = verify_monotone_laws(&poset, &chain, cfg.trials, &mut rng);
            PosetResult::File {
                holds: report.holds(),
                labels: poset.labels.clone(),
                report,
            }
        }
        (None, None) => bail!("give a poset file or --random N"),
    };
    emit("poset", cfg, result)?;
    Ok(0)
}

#[derive(Serialize)]
struct FamilyConfig<'a> {
    file: &'a Path,
    descriptor: &'a FamilyDescriptor,
    horizon_decades: u32,
    samples_per_unit: f64,
    max_n: u64,
}

#[derive(Serialize)]
struct FamilyResult {
    passed: bool,
    grid: Vec<f64>,
    shift: Option<f64>,
    validation: FamilyValidation,
}

fn cmd_family(file: &Path, horizon: u32, samples_per_unit: f64, max_n: u64, exec: Exec) -> Result<u8> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let descriptor = FamilyDescriptor::parse(&text).with_context(|| file.display().to_string())?;
    let family = descriptor.build()?;
    let sched = schedule(horizon, samples_per_unit, exec)?;
    let validation = validate_family(
        &family,
        &sched,
        &ValidationPlan {
            max_n,
            ..ValidationPlan::default()
        },
    )?;
    let shift = match family.kind {
        entangle_order::family::FamilyKind::LogOscillation { shift, .. } => shift,
        _ => None,
    };
    emit(
        "family-check",
        FamilyConfig {
            file,
            descriptor: &descriptor,
            horizon_decades: horizon,
            samples_per_unit,
            max_n,
        },
        FamilyResult {
            passed: validation.passed(),
            grid: family.grid.clone(),
            shift,
            validation,
        },
    )?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    let exec = exec(&cli);
    match &cli.command {
        Command::Validate { file, max_n, per_decade } => cmd_validate(file, *max_n, *per_decade),
        Command::Convert {
            psi,
            phi,
            regime,
            horizon,
            samples_per_unit,
        } => cmd_convert(
            ConvertConfig {
                psi,
                phi,
                regime: *regime,
                horizon_decades: *horizon,
                samples_per_unit: *samples_per_unit,
            },
            exec,
        ),
        Command::ReproducePaper {
            q,
            r_lo,
            r_hi,
            horizon,
            grid,
            samples_per_unit,
        } => {
            let config = ReproduceConfig {
                q: *q,
                r_lo: *r_lo,
                r_hi: *r_hi,
                horizon_decades: *horizon,
                grid_points: *grid,
                samples_per_unit: *samples_per_unit,
                refine_rounds: DEFAULT_REFINE_ROUNDS,
                validity_max_n: (1e12 / (-2.0 * q.ln())) as u64,
                exec,
            };
            cmd_reproduce(config, &cli.out_dir)
        }
        Command::Poset {
            file,
            trials,
            seed,
            random,
            max_elements,
        } => cmd_poset(
            PosetConfig {
                file: file.as_deref(),
                trials: *trials,
                seed: *seed,
                random: *random,
                max_elements: *max_elements,
            },
            exec,
        ),
        Command::FamilyCheck {
            file,
            horizon,
            samples_per_unit,
            max_n,
        } => cmd_family(file, *horizon, *samples_per_unit, *max_n, exec),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
