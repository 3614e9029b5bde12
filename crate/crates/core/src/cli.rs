//! Command-line front end.
//!
//! Every verb prints a JSON report to stdout (or `--out FILE`) and a short
//! human summary to stderr. Exit codes: 0 success, 1 verification failed,
//! 2 usage or input error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::freeness::{enumerate_free, EnumerationMode, FreenessSpec};
use crate::lower_bounds::{self, lower_base, BacktrackReport, DEPTH_CAP};
use crate::morphism::{self, UniformMorphism};
use crate::msearch::{search_uniform_morphism, Checkpoint, SearchConfig, UpperPredicate};
use crate::products::{verify_upper, Parity, UpperProfile};
use crate::rational::Rational;
use crate::words::{circular_exponent, critical_exponent, Word};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "repthresh",
    version,
    about = "Repetition thresholds of products of factors"
)]
struct Cli {
    /// Worker threads (overrides REPTHRESH_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical and circular exponents of a word.
    Analyze { word: String },
    /// Enumerate words avoiding the repetitions forbidden by a spec.
    Enumerate {
        #[arg(long)]
        alphabet: u8,
        /// e.g. `7/4+`, `2`, `202/135+@36`
        #[arg(long)]
        spec: String,
        #[arg(long)]
        max_len: usize,
        #[arg(long, value_enum, default_value = "count")]
        mode: ModeArg,
    },
    /// Morphism utilities.
    Morphism {
        #[command(subcommand)]
        command: MorphismCommand,
    },
    /// Run one of the verification pipelines.
    Verify {
        #[command(subcommand)]
        command: VerifyCommand,
    },
    /// Search for morphisms.
    Search {
        #[command(subcommand)]
        command: SearchCommand,
    },
    /// The value of RT_i(3) and the checks that establish it.
    Theorem {
        #[arg(long)]
        i: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Count,
    List,
    First,
}

#[derive(Debug, Subcommand)]
enum MorphismCommand {
    /// Apply a morphism to a word.
    Apply {
        /// Morphism file, or `g45` / `g514` for the bundled ones.
        #[arg(short, long)]
        morphism: String,
        #[arg(short, long)]
        word: String,
    },
}

#[derive(Debug, Args)]
struct UpperArgs {
    /// Morphism file, or `g45` / `g514` for the bundled ones.
    #[arg(short, long)]
    morphism: String,
    /// Certify classes only up to this length (a partial check).
    #[arg(long)]
    classes_max: Option<usize>,
    #[arg(long)]
    j_max: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// pexp_i <= 3i/2 + 1/4 for even i.
    UpperEven(UpperArgs),
    /// pexp_i <= 3i/2 + 1/6 for odd i >= 3.
    UpperOdd(UpperArgs),
    /// No infinite square-free ternary word avoids the forbidden pattern pairs.
    LowerOdd {
        #[arg(long, default_value_t = DEPTH_CAP)]
        max_len: usize,
    },
    /// Ternary words keeping all two-factor products below the threshold die out.
    LowerEven {
        #[arg(long, default_value = "13/4")]
        threshold: String,
        #[arg(long, default_value_t = DEPTH_CAP)]
        max_len: usize,
    },
}

#[derive(Debug, Subcommand)]
enum SearchCommand {
    /// Backtracking search for a uniform morphism passing an upper-bound profile.
    Morphism {
        #[arg(long, value_enum)]
        profile: ProfileArg,
        /// `A..B` (inclusive) or a single `k`.
        #[arg(long)]
        k_range: String,
        #[arg(long)]
        node_limit: Option<u64>,
        /// Checkpoint file to resume from.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Where to write a checkpoint if the node limit is hit.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Write the found morphism here in the morphism file format.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Progress line on stderr every N nodes.
        #[arg(long, default_value_t = 0)]
        progress_every: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    Even,
    Odd,
}

/// A failure that maps to an exit code with a message.
struct Fail(i32, String);

fn usage(msg: impl ToString) -> Fail {
    Fail(EXIT_USAGE, msg.to_string())
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = match thread_count(cli.threads) {
        Ok(t) => t,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

/// `--threads` wins over `REPTHRESH_THREADS`; 0 or unset means rayon's default.
fn thread_count(flag: Option<usize>) -> Result<usize, Fail> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var("REPTHRESH_THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| usage(format!("REPTHRESH_THREADS={s:?} is not a number"))),
        Err(_) => Ok(0),
    }
}

fn emit<T: Serialize>(cli: &Cli, report: &T) -> Result<(), Fail> {
    let text = serde_json::to_string_pretty(report).expect("reports serialize") + "\n";
    match &cli.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_morphism(name: &str) -> Result<UniformMorphism, Fail> {
    if !Path::new(name).exists() {
        match name {
            "g45" => return Ok(morphism::g45()),
            "g514" => return Ok(morphism::g514()),
            _ => {}
        }
    }
    UniformMorphism::load(name).map_err(usage)
}

fn verdict(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn dispatch(cli: &Cli) -> Result<i32, Fail> {
    match &cli.command {
        Command::Analyze { word } => analyze(cli, word),
        Command::Enumerate {
            alphabet,
            spec,
            max_len,
            mode,
        } => {
            let spec: FreenessSpec = spec.parse().map_err(usage)?;
            let mode = match mode {
                ModeArg::Count => EnumerationMode::Count,
                ModeArg::List => EnumerationMode::List,
                ModeArg::First => EnumerationMode::First,
            };
            let e = enumerate_free(*alphabet, spec, *max_len, mode).map_err(usage)?;
            let r = &e.report;
            eprintln!(
                "{spec}-free words over {alphabet} letters: longest {} (exhausted: {}), {} at length {max_len}",
                r.max_length_reached,
                r.exhausted,
                r.counts.get(*max_len).copied().unwrap_or(0),
            );
            emit(cli, &e)?;
            Ok(EXIT_OK)
        }
        Command::Morphism {
            command: MorphismCommand::Apply { morphism, word },
        } => {
            let m = load_morphism(morphism)?;
            let w = Word::parse(word, m.arity() as u8).map_err(usage)?;
            let image = m.apply(&w).map_err(usage)?;
            eprintln!("image of length {}", image.len());
            emit(
                cli,
                &json!({ "word": w, "image": image, "length": image.len() }),
            )?;
            Ok(EXIT_OK)
        }
        Command::Verify { command } => verify(cli, command),
        Command::Search { command } => search(cli, command),
        Command::Theorem { i } => theorem(cli, *i),
    }
}

fn analyze(cli: &Cli, word: &str) -> Result<i32, Fail> {
    let w: Word = word.parse().map_err(usage)?;
    let (crit, rep) = critical_exponent(&w).map_err(usage)?;
    let circ = circular_exponent(&w).map_err(usage)?;
    let factor = Word::new(rep.factor(&w).to_vec(), w.alphabet()).expect("factor of w");
    eprintln!(
        "critical exponent {crit} ({factor}, period {}), circular exponent {circ}",
        rep.period
    );
    emit(
        cli,
        &json!({
            "word": w,
            "length": w.len(),
            "critical_exponent": crit,
            "witness": { "repetition": rep, "factor": factor },
            "circular_exponent": circ,
        }),
    )?;
    Ok(EXIT_OK)
}

fn upper_profile(base: UpperProfile, args: &UpperArgs) -> UpperProfile {
    let mut p = base;
    if let Some(n) = args.classes_max {
        p.classes_max = n;
        if !p.covers_all_periods() {
            p.name = format!("{}-partial", p.name);
        }
    }
    if let Some(j) = args.j_max {
        p.j_max = j;
    }
    p
}

fn lower_summary(r: &BacktrackReport) {
    if r.exhausted {
        eprintln!(
            "exhausted: no word longer than {} ({} nodes)",
            r.max_length, r.node_count
        );
    } else {
        eprintln!("NOT EXHAUSTED: words of length {} survive", r.max_length);
    }
}

fn verify(cli: &Cli, command: &VerifyCommand) -> Result<i32, Fail> {
    match command {
        VerifyCommand::UpperEven(args) | VerifyCommand::UpperOdd(args) => {
            let base = match command {
                VerifyCommand::UpperEven(_) => UpperProfile::even(),
                _ => UpperProfile::odd(),
            };
            let profile = upper_profile(base, args);
            let m = load_morphism(&args.morphism)?;
            let v = verify_upper(&m, &profile).map_err(usage)?;
            match v.failed_stage {
                None => eprintln!(
                    "PASS ({}): {} certificates{}",
                    profile.name,
                    v.certificates.len(),
                    if v.establishes_bound {
                        ""
                    } else {
                        "; partial profile, bound not established"
                    }
                ),
                Some(stage) => eprintln!("FAIL at stage {stage:?}"),
            }
            emit(cli, &v)?;
            Ok(verdict(v.passed))
        }
        VerifyCommand::LowerOdd { max_len } => {
            let r = lower_bounds::search_lower_odd(true, *max_len, crate::dfs::Goal::Exhaust);
            lower_summary(&r);
            emit(cli, &r)?;
            Ok(verdict(r.exhausted))
        }
        VerifyCommand::LowerEven { threshold, max_len } => {
            let t: Rational = threshold.parse().map_err(usage)?;
            let r = lower_bounds::search_lower_even(t, *max_len, crate::dfs::Goal::Exhaust)
                .map_err(usage)?;
            lower_summary(&r);
            emit(cli, &r)?;
            Ok(verdict(r.exhausted))
        }
    }
}

fn parse_k_range(s: &str) -> Result<std::ops::RangeInclusive<usize>, Fail> {
    let bad = || usage(format!("bad k range {s:?}, expected A..B or K"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| bad())?;
            Ok(a..=b)
        }
        None => {
            let k = s.trim().parse().map_err(|_| bad())?;
            Ok(k..=k)
        }
    }
}

fn search(cli: &Cli, command: &SearchCommand) -> Result<i32, Fail> {
    let SearchCommand::Morphism {
        profile,
        k_range,
        node_limit,
        resume,
        checkpoint,
        emit: emit_path,
        progress_every,
    } = command;
    let profile = match profile {
        ProfileArg::Even => UpperProfile::even(),
        ProfileArg::Odd => UpperProfile::odd(),
    };
    let mut cfg = SearchConfig::new(parse_k_range(k_range)?);
    cfg.node_limit = *node_limit;
    cfg.progress_every = *progress_every;
    if let Some(path) = resume {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        cfg.resume = Some(serde_json::from_str::<Checkpoint>(&text).map_err(usage)?);
    }
    let pred = UpperPredicate::new(profile);
    let out = search_uniform_morphism(&pred, &cfg, |p| eprintln!("{p}"));
    if let (Some(cp), Some(path)) = (&out.checkpoint, checkpoint) {
        let text = serde_json::to_string_pretty(cp).expect("checkpoint serializes");
        fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    if let (Some(m), Some(path)) = (out.first(), emit_path) {
        fs::write(path, m.to_text())
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    match (out.first(), &out.checkpoint) {
        (Some(m), _) => eprintln!("found a {}-uniform morphism", m.image_len()),
        (None, Some(cp)) => eprintln!("node limit reached at k={} (path {})", cp.k, cp.path),
        (None, None) => eprintln!("no morphism in the range"),
    }
    emit(cli, &out)?;
    Ok(verdict(out.first().is_some()))
}

fn theorem(cli: &Cli, i: usize) -> Result<i32, Fail> {
    let value = lower_bounds::theorem_value(i).ok_or_else(|| usage("i must be at least 1"))?;
    let report = if i == 1 {
        json!({
            "i": i,
            "value": value,
            "note": "RT_1(3) is the repetition threshold RT(3) = 7/4",
            "checks": ["enumerate --alphabet 3 --spec 7/4+ --max-len 60"],
        })
    } else {
        let parity = Parity::of(i);
        let (lower, upper) = match parity {
            Parity::Even => (
                "verify lower-even --threshold 13/4",
                "verify upper-even -m g45",
            ),
            Parity::Odd => ("verify lower-odd", "verify upper-odd -m g514"),
        };
        json!({
            "i": i,
            "value": value,
            "parity": parity,
            "lower_bound": { "base": lower_base(parity), "lifted": value, "check": lower },
            "upper_bound": { "check": upper },
        })
    };
    eprintln!("RT_{i}(3) = {value}");
    emit(cli, &report)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_range_forms() {
        assert_eq!(parse_k_range("1..5").ok(), Some(1..=5));
        assert_eq!(parse_k_range("1..=5").ok(), Some(1..=5));
        assert_eq!(parse_k_range("45").ok(), Some(45..=45));
        assert!(parse_k_range("a..b").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["repthresh", "frobnicate"]), EXIT_USAGE);
        assert_eq!(
            run([
                "repthresh",
                "enumerate",
                "--alphabet",
                "3",
                "--spec",
                "1/2",
                "--max-len",
                "3"
            ]),
            EXIT_USAGE
        );
        assert_eq!(
            run([
                "repthresh",
                "morphism",
                "apply",
                "-m",
                "/nonexistent",
                "-w",
                "0"
            ]),
            EXIT_USAGE
        );
        assert_eq!(run(["repthresh", "theorem", "--i", "0"]), EXIT_USAGE);
    }

    #[test]
    fn threads_flag_beats_environment() {
        assert_eq!(thread_count(Some(3)).ok(), Some(3));
    }
}
