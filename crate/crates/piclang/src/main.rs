//! Command-line front end. Exit status: 0 success, member or equivalent;
//! 1 non-member or inequivalent; 2 usage, input or cap errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use piclang::automaton::CellularAutomaton;
use piclang::compilers::{
    automaton_to_sentence, sentence_to_automaton, sentence_to_tiling, tiling_to_sentence, DEFAULT_STATE_CAP,
};
use piclang::logic::{parse_sentence, render_pretty, EsoSentence, Signature};
use piclang::model_check::{equivalent_up_to, Counterexample, LanguageDef, DEFAULT_PICTURE_CAP};
use piclang::normalize::{
    cardinality_to_monadic, localize_pixel_sentence, reduce_arities, skolemize_universal, CardinalitySentence,
};
use piclang::picture::{EncodingKind, Picture};
use piclang::sorted::{build_perm_tree, sort_pipeline};
use piclang::tiling::TilingSystem;
use piclang::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "piclang", version, about = "Picture languages: tiling systems, cellular automata and ESO sentences")]
struct Cli {
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Pixel,
    Coordinate,
}

impl From<Encoding> for EncodingKind {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::Pixel => EncodingKind::Pixel,
            Encoding::Coordinate => EncodingKind::Coordinate,
        }
    }
}

/// How to read a sentence file: the signature is not part of the file.
#[derive(Args, Clone)]
struct SigArgs {
    #[arg(long, value_enum)]
    encoding: Option<Encoding>,
    /// Picture dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated input alphabet.
    #[arg(long, value_delimiter = ',')]
    alphabet: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Compilation {
    TilingToEso,
    EsoToTiling,
    CaToEso,
    EsoToCa,
}

#[derive(Clone, Copy, ValueEnum)]
enum Normalization {
    Localize,
    Cardinality,
    Skolem,
    Arity,
    SortedPipeline,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Mirror,
    Sym,
}

#[derive(Subcommand)]
enum Command {
    /// Membership of a picture.
    Check {
        /// Tiling system JSON.
        #[arg(long, group = "lang")]
        tiling: Option<PathBuf>,
        /// Cellular automaton JSON.
        #[arg(long, group = "lang")]
        automaton: Option<PathBuf>,
        /// Sentence file; the signature comes from the flags or the picture.
        #[arg(long, group = "lang")]
        sentence: Option<PathBuf>,
        #[arg(long, group = "lang", value_enum)]
        oracle: Option<Oracle>,
        /// Picture file: "d n", the alphabet, then the cells row by row.
        #[arg(long)]
        picture: PathBuf,
        /// Automaton time bound c·n + c′.
        #[arg(long, default_value_t = 1)]
        c: usize,
        /// Additive constant c′ of the time bound.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        c_prime: i64,
        #[command(flatten)]
        sig: SigArgs,
    },
    /// Translate between formalisms.
    Compile {
        #[arg(value_enum)]
        what: Compilation,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Bound on the explicit state set of eso-to-ca.
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
        #[command(flatten)]
        sig: SigArgs,
    },
    /// Rewrite a sentence into a normal form.
    Normalize {
        #[arg(value_enum)]
        what: Normalization,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Variable bound for skolem.
        #[arg(long)]
        vars: Option<usize>,
        #[command(flatten)]
        sig: SigArgs,
    },
    /// Compare two languages on every picture up to a side.
    Equiv {
        /// Tiling or automaton JSON, sentence file, or the oracle names mirror / sym.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        /// Check this many seeded random pictures per side instead of all of them.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_PICTURE_CAP)]
        picture_cap: u128,
        #[command(flatten)]
        sig: SigArgs,
    },
    /// Print the permutation tree T_d.
    PermTree {
        #[arg(long)]
        d: usize,
    },
    /// Membership in Mirror or Sym.
    Oracle {
        #[arg(value_enum)]
        which: Oracle,
        #[arg(long)]
        picture: PathBuf,
    },
}

enum Outcome {
    Yes,
    No,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Prefixes errors with the file they came from.
fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Format(m) if m.starts_with(&path.display().to_string()) => Error::Format(m),
        e => Error::Format(format!("{}: {e}", path.display())),
    })
}

fn load_picture(path: &Path) -> Result<Picture> {
    in_file(path, Picture::parse(&read(path)?))
}

fn load_tiling(path: &Path) -> Result<TilingSystem> {
    in_file(path, TilingSystem::from_json(&read(path)?))
}

fn load_automaton(path: &Path) -> Result<CellularAutomaton> {
    in_file(path, CellularAutomaton::from_json(&read(path)?))
}

impl SigArgs {
    fn signature(
        &self,
        default_kind: Option<EncodingKind>,
        d: Option<usize>,
        alphabet: Option<&[String]>,
    ) -> Result<Signature> {
        let kind =
            self.encoding.map(EncodingKind::from).or(default_kind).ok_or_else(|| usage("--encoding is required"))?;
        let d = self.d.or(d).ok_or_else(|| usage("--d is required"))?;
        let alphabet: Vec<&str> = if self.alphabet.is_empty() {
            alphabet.ok_or_else(|| usage("--alphabet is required"))?.iter().map(String::as_str).collect()
        } else {
            self.alphabet.iter().map(String::as_str).collect()
        };
        Ok(Signature::new(kind, d, &alphabet))
    }
}

fn usage(msg: &str) -> Error {
    Error::Format(msg.to_string())
}

fn load_sentence(path: &Path, sig: &Signature) -> Result<EsoSentence> {
    in_file(path, parse_sentence(&read(path)?, sig))
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| Error::Format(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn verdict(member: bool) -> Outcome {
    println!("VERDICT: {}", if member { "MEMBER" } else { "NON-MEMBER" });
    if member {
        Outcome::Yes
    } else {
        Outcome::No
    }
}

fn oracle_def(o: Oracle) -> LanguageDef {
    match o {
        Oracle::Mirror => LanguageDef::Mirror,
        Oracle::Sym => LanguageDef::Sym,
    }
}

enum Named {
    Ready(LanguageDef, Option<usize>, Option<Vec<String>>),
    Sentence(PathBuf),
}

/// A language named on the command line; sentences wait for a signature.
fn language(name: &str) -> Result<Named> {
    match name {
        "mirror" => return Ok(Named::Ready(LanguageDef::Mirror, None, None)),
        "sym" => return Ok(Named::Ready(LanguageDef::Sym, None, None)),
        _ => {}
    }
    let path = Path::new(name);
    let text = read(path)?;
    if !text.trim_start().starts_with('{') {
        return Ok(Named::Sentence(path.to_path_buf()));
    }
    let v: serde_json::Value = in_file(path, serde_json::from_str(&text).map_err(Error::from))?;
    if v.get("deltas").is_some() {
        let ts = load_tiling(path)?;
        let (d, s) = (ts.d(), ts.sigma().to_vec());
        return Ok(Named::Ready(LanguageDef::Tiling(ts), Some(d), Some(s)));
    }
    let a = load_automaton(path)?;
    let (d, s) = (a.d(), a.sigma_names());
    Ok(Named::Ready(LanguageDef::Automaton { automaton: a, c: 1, c_prime: 1 }, Some(d), Some(s)))
}

fn sampled(
    a: &LanguageDef,
    b: &LanguageDef,
    d: usize,
    sigma: &[String],
    max_n: usize,
    k: usize,
    seed: u64,
) -> Result<Option<Counterexample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=max_n {
        let total = Picture::count(d, n, sigma.len());
        for _ in 0..k {
            let code = if total > u64::MAX as u128 {
                rng.random::<u64>() as u128
            } else {
                rng.random_range(0..total as u64) as u128
            };
            let p = Picture::nth(d, n, sigma, code % total);
            let (va, vb) = (a.member(&p)?, b.member(&p)?);
            if va != vb {
                return Ok(Some(Counterexample { picture: p, verdict_a: va, verdict_b: vb }));
            }
        }
    }
    Ok(None)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Check { tiling, automaton, sentence, oracle, picture, c, c_prime, sig } => {
            let p = load_picture(&picture)?;
            let def = if let Some(t) = tiling {
                LanguageDef::Tiling(load_tiling(&t)?)
            } else if let Some(a) = automaton {
                LanguageDef::Automaton { automaton: load_automaton(&a)?, c, c_prime }
            } else if let Some(s) = sentence {
                let sg = sig.signature(None, Some(p.d()), Some(p.alphabet()))?;
                LanguageDef::Sentence(load_sentence(&s, &sg)?)
            } else if let Some(o) = oracle {
                oracle_def(o)
            } else {
                return Err(usage("one of --tiling, --automaton, --sentence, --oracle is required"));
            };
            Ok(verdict(def.member(&p)?))
        }
        Command::Compile { what, input, output, state_cap, sig } => {
            let text = match what {
                Compilation::TilingToEso => render_pretty(&tiling_to_sentence(&load_tiling(&input)?)),
                Compilation::CaToEso => render_pretty(&automaton_to_sentence(&load_automaton(&input)?)),
                Compilation::EsoToTiling => {
                    let s = load_sentence(&input, &sig.signature(Some(EncodingKind::Pixel), None, None)?)?;
                    sentence_to_tiling(&s, s.sig.d)?.to_json()
                }
                Compilation::EsoToCa => {
                    let s = load_sentence(&input, &sig.signature(Some(EncodingKind::Coordinate), None, None)?)?;
                    sentence_to_automaton(&s, s.sig.d)?.to_explicit(state_cap)?.to_json()
                }
            };
            emit(&output, &text)?;
            Ok(Outcome::Yes)
        }
        Command::Normalize { what, input, output, vars, sig } => {
            let s = match what {
                Normalization::Cardinality => {
                    let sg = sig.signature(Some(EncodingKind::Pixel), None, None)?;
                    let c = in_file(&input, CardinalitySentence::parse(&read(&input)?, &sg))?;
                    cardinality_to_monadic(&c, sg.d)?
                }
                _ => {
                    let default = match what {
                        Normalization::Localize => EncodingKind::Pixel,
                        _ => EncodingKind::Coordinate,
                    };
                    let s = load_sentence(&input, &sig.signature(Some(default), None, None)?)?;
                    match what {
                        Normalization::Localize => localize_pixel_sentence(&s)?,
                        Normalization::Skolem => skolemize_universal(&s, vars.unwrap_or(s.sig.d + 1))?,
                        Normalization::Arity => reduce_arities(&s)?,
                        _ => sort_pipeline(&s, s.sig.d)?,
                    }
                }
            };
            emit(&output, &render_pretty(&s))?;
            Ok(Outcome::Yes)
        }
        Command::Equiv { a, b, max_n, sample, picture_cap, sig } => {
            let (na, nb) = (language(&a)?, language(&b)?);
            let fixed = |n: &Named| match n {
                Named::Ready(_, d, s) => (*d, s.clone()),
                Named::Sentence(_) => (None, None),
            };
            let ((da, sa), (db, sb)) = (fixed(&na), fixed(&nb));
            let d = sig.d.or(da).or(db).ok_or_else(|| usage("--d is required"))?;
            let sigma = if sig.alphabet.is_empty() {
                sa.or(sb).ok_or_else(|| usage("--alphabet is required"))?
            } else {
                sig.alphabet.clone()
            };
            let resolve = |n: Named| -> Result<LanguageDef> {
                match n {
                    Named::Ready(l, ..) => Ok(l),
                    Named::Sentence(p) => {
                        Ok(LanguageDef::Sentence(load_sentence(&p, &sig.signature(None, Some(d), Some(&sigma))?)?))
                    }
                }
            };
            let (la, lb) = (resolve(na)?, resolve(nb)?);
            let cex = match sample {
                Some(k) => sampled(&la, &lb, d, &sigma, max_n, k, cli.seed)?,
                None => equivalent_up_to(&la, &lb, d, &sigma, max_n, picture_cap)?,
            };
            match cex {
                None => {
                    let how = if sample.is_some() { "sampled" } else { "exhaustive" };
                    println!("VERDICT: EQUIVALENT up to n={max_n} ({how})");
                    Ok(Outcome::Yes)
                }
                Some(c) => {
                    println!("VERDICT: INEQUIVALENT");
                    println!("COUNTEREXAMPLE: {}", c.picture.inline());
                    println!("MEMBERSHIP: a={} b={}", c.verdict_a, c.verdict_b);
                    Ok(Outcome::No)
                }
            }
        }
        Command::PermTree { d } => {
            print!("{}", build_perm_tree(d)?.dump());
            Ok(Outcome::Yes)
        }
        Command::Oracle { which, picture } => Ok(verdict(oracle_def(which).member(&load_picture(&picture)?)?)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(Outcome::Yes) => ExitCode::SUCCESS,
        Ok(Outcome::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
