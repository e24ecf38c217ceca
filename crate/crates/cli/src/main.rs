use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use lgf::guess::{guess_ode, guess_recurrence, multi_step_pipeline, GuessOptions, MultistepOptions};
use lgf::lattice::Lattice;
use lgf::operator::LinearODE;
use lgf::ore::holonomic::factor_integer_roots;
use lgf::ore::{apply_ode_to_series, indicial_polynomial, ode_to_recurrence, quotient_closure, verify_certificate};
use lgf::pipeline::{run_pipeline, OdeSource, PipelineOptions};
use lgf::series::{format_rational, ExactSeries};
use lgf::walkcount::{count_excursions, excursion_series, CountOptions};
use lgf::wallis::lgf_series_wallis;
use lgf::{golden, Error, Result};

#[derive(Parser)]
#[command(name = "lgf", version, about = "Lattice Green's functions of fcc lattices")]
struct Cli {
    /// Print a JSON object instead of the line-oriented format.
    #[arg(long, global = true)]
    json: bool,
    /// Write the main output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count excursions a_n(0) exactly by walking the lattice.
    Count {
        #[arg(short = 'd')]
        d: usize,
        #[arg(short = 'N')]
        n: usize,
        /// Coordinates beyond this radius are dropped (default N/2 + 1).
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Series coefficients p_n(0) from the multinomial expansion.
    SeriesWallis {
        #[arg(short = 'd')]
        d: usize,
        #[arg(short = 'N')]
        n: usize,
    },
    /// Guess a linear recurrence for a sequence.
    GuessRec {
        #[command(flatten)]
        input: SeriesInput,
        #[command(flatten)]
        bounds: Bounds,
        /// Guess for the partial sums instead of the terms.
        #[arg(long)]
        partial_sums: bool,
    },
    /// Guess a linear differential equation for a power series.
    GuessOde {
        #[command(flatten)]
        input: SeriesInput,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// a_n(0) by guessing recurrences on successively smaller slices.
    Multistep {
        #[arg(short = 'd')]
        d: usize,
        #[arg(short = 'N')]
        n: usize,
        /// Coordinates dropped at each step, e.g. 2,1,2.
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<usize>,
        /// Levels counted directly before guessing.
        #[arg(long)]
        count_depth: Option<usize>,
    },
    /// Recurrence for the coefficients of a series annihilated by an ODE.
    Ode2rec {
        #[command(flatten)]
        ode: OdeInput,
    },
    /// ODE for the series divided by 1 - z (the partial sums).
    Closure {
        #[command(flatten)]
        ode: OdeInput,
    },
    /// Indicial polynomial at z = 0.
    Indicial {
        #[command(flatten)]
        ode: OdeInput,
    },
    /// Check that an ODE annihilates the counted series.
    VerifyOde {
        #[command(flatten)]
        ode: OdeInput,
        #[arg(short = 'N', default_value_t = 30)]
        n: usize,
    },
    /// Verify a creative-telescoping certificate file.
    Certify { file: PathBuf },
    /// P(1) and the return probability from counting to digits.
    Pipeline {
        #[arg(short = 'd')]
        d: usize,
        #[arg(long, default_value_t = 50)]
        digits: usize,
        /// Last index of the partial sums that are computed.
        #[arg(short = 'N', default_value_t = 2000)]
        n: usize,
        /// Differential equation to use instead of guessing.
        #[arg(long)]
        ode_file: Option<PathBuf>,
        /// Number of inverse powers in the tail fit.
        #[arg(long, default_value_t = 30)]
        fit_order: usize,
    },
}

#[derive(Args)]
struct SeriesInput {
    /// Sequence file in the `# lgf-seq` format.
    file: Option<PathBuf>,
    /// Count the series of this dimension instead of reading a file.
    #[arg(short = 'd')]
    d: Option<usize>,
    #[arg(short = 'N')]
    n: Option<usize>,
    /// Divide term n of the file by c^n.
    #[arg(long)]
    scale: bool,
}

#[derive(Args)]
struct Bounds {
    #[arg(long, default_value_t = 6)]
    max_order: usize,
    #[arg(long, default_value_t = 12)]
    max_degree: usize,
}

#[derive(Args)]
struct OdeInput {
    /// ODE file (`# lgf-op kind=ode` or `Dz^k : coefficient` lines).
    #[arg(long)]
    ode_file: Option<PathBuf>,
    /// Use the bundled equation of this dimension.
    #[arg(short = 'd')]
    d: Option<usize>,
}

fn count_opts(threads: usize) -> CountOptions {
    CountOptions { threads, ..CountOptions::from_env() }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))
}

fn load_series(input: &SeriesInput, threads: usize) -> Result<ExactSeries> {
    match (&input.file, input.d) {
        (Some(f), None) => {
            let (head, s) = ExactSeries::parse_dump(&read(f)?)?;
            Ok(if input.scale { s.scale_by_power(head.c) } else { s })
        }
        (None, Some(d)) => {
            let n = input.n.ok_or_else(|| Error::Validation("-d needs -N".into()))?;
            excursion_series(&Lattice::fcc(d)?, n, &count_opts(threads))
        }
        _ => Err(Error::Validation("give either a sequence file or -d with -N".into())),
    }
}

fn load_ode(input: &OdeInput) -> Result<LinearODE> {
    match (&input.ode_file, input.d) {
        (Some(f), None) => golden::parse_ode(&read(f)?),
        (None, Some(d)) => {
            Lattice::fcc(d)?;
            golden::fcc_ode(d).ok_or_else(|| {
                Error::Unsupported(format!("no bundled equation for d={d}; supply one with --ode-file"))
            })
        }
        _ => Err(Error::Validation("give either --ode-file or -d".into())),
    }
}

fn integer_dump(d: usize, c: u64, values: &[num_bigint::BigUint]) -> String {
    let mut s = format!("# lgf-seq d={d} c={c} N={}\n", values.len() - 1);
    for v in values {
        s.push_str(&v.to_string());
        s.push('\n');
    }
    s
}

fn rationals_json(v: &[BigRational]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(format_rational(x))).collect())
}

/// Main output as text, and the same content as JSON.
struct Output {
    text: String,
    json: Value,
    /// Nonzero when the command ran but the object failed its check.
    failure: Option<Error>,
}

impl Output {
    fn ok(text: String, json: Value) -> Output {
        Output { text, json, failure: None }
    }
}

fn run(cli: &Cli) -> Result<Output> {
    let threads = cli.threads.max(1);
    match &cli.cmd {
        Cmd::Count { d, n, radius } => {
            let lattice = Lattice::fcc(*d)?;
            let opts = CountOptions { radius_cut: *radius, ..count_opts(threads) };
            let a = count_excursions(&lattice, *n, &opts)?;
            let json = json!({"d": d, "c": lattice.coordination(), "N": n,
                "counts": a.iter().map(|v| v.to_string()).collect::<Vec<_>>()});
            Ok(Output::ok(integer_dump(*d, lattice.coordination(), &a), json))
        }
        Cmd::SeriesWallis { d, n } => {
            let lattice = Lattice::fcc(*d)?;
            let s = lgf_series_wallis(*d, *n)?;
            let json = json!({"d": d, "N": n, "coefficients": rationals_json(&s.coefficients)});
            Ok(Output::ok(s.to_dump(*d, lattice.coordination()), json))
        }
        Cmd::GuessRec { input, bounds, partial_sums } => {
            let mut s = load_series(input, threads)?;
            if *partial_sums {
                s = s.partial_sums();
            }
            let rec = guess_recurrence(&s, &GuessOptions::new(bounds.max_order, bounds.max_degree))?
                .ok_or_else(|| Error::InsufficientData(format!("no recurrence within order {} and degree {}", bounds.max_order, bounds.max_degree)))?;
            let json = json!({"kind": "rec", "order": rec.order(), "degree": rec.degree(), "text": rec.to_text(), "pretty": rec.pretty()});
            Ok(Output::ok(rec.to_text(), json))
        }
        Cmd::GuessOde { input, bounds } => {
            let s = load_series(input, threads)?;
            let ode = guess_ode(&s, &GuessOptions::new(bounds.max_order, bounds.max_degree))?
                .ok_or_else(|| Error::InsufficientData(format!("no ODE within order {} and degree {}", bounds.max_order, bounds.max_degree)))?;
            let json = json!({"kind": "ode", "order": ode.order(), "degree": ode.degree(), "text": ode.to_text(), "pretty": ode.pretty()});
            Ok(Output::ok(ode.to_text(), json))
        }
        Cmd::Multistep { d, n, schedule, count_depth } => {
            let lattice = Lattice::fcc(*d)?;
            let opts = MultistepOptions {
                threads,
                count_depth: *count_depth,
                mem_budget: CountOptions::from_env().mem_budget,
                ..Default::default()
            };
            let r = multi_step_pipeline(&lattice, schedule, *n, &opts)?;
            for s in &r.stages {
                eprintln!(
                    "slice of {} coordinates: {} recurrence(s) of shape {}{}, origin relation {}, levels {} -> {}",
                    s.dim,
                    s.recurrences,
                    s.shape,
                    if s.odd { " odd" } else { "" },
                    s.origin_shape,
                    s.known,
                    s.extended_to
                );
            }
            eprintln!("{} primes, first {} values checked against direct counts", r.primes_used, r.cross_checked);
            let json = json!({"d": d, "N": n, "schedule": schedule,
                "counts": r.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "cross_checked": r.cross_checked});
            Ok(Output::ok(integer_dump(*d, lattice.coordination(), &r.values), json))
        }
        Cmd::Ode2rec { ode } => {
            let rec = ode_to_recurrence(&load_ode(ode)?);
            let json = json!({"kind": "rec", "order": rec.order(), "degree": rec.degree(), "text": rec.to_text()});
            Ok(Output::ok(rec.to_text(), json))
        }
        Cmd::Closure { ode } => {
            let c = quotient_closure(&load_ode(ode)?);
            let json = json!({"kind": "ode", "order": c.order(), "degree": c.degree(), "text": c.to_text()});
            Ok(Output::ok(c.to_text(), json))
        }
        Cmd::Indicial { ode } => {
            let p = indicial_polynomial(&load_ode(ode)?);
            let factored = factor_integer_roots(&p, "l");
            let json = json!({"polynomial": p.pretty("l"), "factored": factored});
            Ok(Output::ok(format!("{factored}\n"), json))
        }
        Cmd::VerifyOde { ode, n } => {
            let e = load_ode(ode)?;
            let d = ode.d.ok_or_else(|| Error::Validation("verify-ode needs -d for the series to check against".into()))?;
            let s = excursion_series(&Lattice::fcc(d)?, *n, &count_opts(threads))?;
            let res = apply_ode_to_series(&e, &s)?;
            let bad = res.coefficients.iter().position(|c| c != &BigRational::from_integer(BigInt::from(0)));
            let text = match bad {
                None => format!("pass: residual vanishes on {} coefficients\n", res.len()),
                Some(i) => format!("fail: residual coefficient of z^{i} is {}\n", format_rational(&res.coefficients[i])),
            };
            let json = json!({"passed": bad.is_none(), "checked": res.len(), "first_failing": bad});
            let failure = bad.map(|i| Error::Verification(format!("the equation fails at z^{i}")));
            Ok(Output { text, json, failure })
        }
        Cmd::Certify { file } => {
            let f = File::open(file).map_err(|e| Error::Validation(format!("cannot open {}: {e}", file.display())))?;
            let rep = verify_certificate(BufReader::new(f))?;
            let text = if rep.passed {
                format!("pass: {} terms, residual zero\n", rep.terms)
            } else {
                format!(
                    "fail: {} terms, residual has {} monomials, first {}\n",
                    rep.terms,
                    rep.residual_terms,
                    rep.first_failing.as_deref().unwrap_or("?")
                )
            };
            let json = json!({"passed": rep.passed, "terms": rep.terms, "residual_terms": rep.residual_terms,
                "first_failing": rep.first_failing, "numeric_agrees": rep.numeric_agrees});
            let failure = (!rep.passed).then(|| Error::Verification("certificate does not verify".into()));
            Ok(Output { text, json, failure })
        }
        Cmd::Pipeline { d, digits, n, ode_file, fit_order } => {
            let source = match ode_file {
                Some(f) => Some(OdeSource::Given(golden::parse_ode(&read(f)?)?)),
                None => None,
            };
            let opts = PipelineOptions {
                source,
                digits: *digits,
                terms: *n,
                fit_order: *fit_order,
                count: count_opts(threads),
                ..Default::default()
            };
            let rep = run_pipeline(*d, &opts)?;
            for (stage, t) in &rep.timings {
                eprintln!("{stage}: {:.1} s", t.as_secs_f64());
            }
            let json = json!({
                "d": d,
                "ode": rep.ode.to_text(),
                "ode_origin": rep.ode_origin,
                "closure": rep.closure.to_text(),
                "recurrence": rep.recurrence.to_text(),
                "checked_terms": rep.checked_terms,
                "divergent": rep.divergent,
                "P1": rep.p1.as_ref().map(|p| json!({"digits": p.text, "places": p.places})),
                "R": {"digits": rep.r.text, "places": rep.r.places},
            });
            Ok(Output::ok(rep.summary(), json))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        let body = if cli.json { format!("{}\n", serde_json::to_string_pretty(&out.json).expect("json")) } else { out.text };
        match &cli.out {
            Some(p) => std::fs::write(p, body).map_err(|e| Error::Validation(format!("cannot write {}: {e}", p.display())))?,
            None => {
                let mut so = std::io::stdout().lock();
                let _ = so.write_all(body.as_bytes());
            }
        }
        match out.failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
