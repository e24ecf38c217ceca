//! One line per acceptance criterion: `PASS`/`FAIL`, a label, the measured
//! runtime and the limit it is held to. Run with
//! `cargo test -p lgf --test acceptance`.

use std::io::Cursor;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use lgf::golden;
use lgf::guess::{guess_ode, multi_step_pipeline, GuessOptions, MultistepOptions};
use lgf::lattice::Lattice;
use lgf::ore::certificate::certificate_residual;
use lgf::ore::holonomic::factor_integer_roots;
use lgf::ore::{apply_ode_to_series, indicial_polynomial, parse_operator, verify_certificate, IntegrandSpec, OrePoly};
use lgf::operator::LinearODE;
use lgf::pipeline::{run_pipeline, OdeSource, PipelineOptions};
use lgf::series::ExactSeries;
use lgf::walkcount::{count_excursions, excursion_series, CountOptions};
use lgf::wallis::lgf_series_wallis;

type Outcome = Result<String, String>;

struct Report {
    failed: usize,
}

impl Report {
    fn run(&mut self, id: &str, limit: Duration, f: impl FnOnce() -> Outcome) {
        let t = Instant::now();
        let out = f();
        let el = t.elapsed();
        let (ok, note) = match out {
            Ok(n) if el <= limit => (true, n),
            Ok(n) => (false, format!("{n}; too slow")),
            Err(e) => (false, e),
        };
        if !ok {
            self.failed += 1;
        }
        println!(
            "{} {id}: {note} [{:.1}s, limit {}s]",
            if ok { "PASS" } else { "FAIL" },
            el.as_secs_f64(),
            limit.as_secs()
        );
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn counts_4d() -> Outcome {
    let l = Lattice::fcc(4).map_err(|e| e.to_string())?;
    let c = count_excursions(&l, 5, &CountOptions::default()).map_err(|e| e.to_string())?;
    let want: Vec<u64> = vec![1, 0, 24, 192, 3384, 51840];
    ensure(c.iter().map(|v| v.to_string()).eq(want.iter().map(|v| v.to_string())), format!("counts {c:?}"))?;
    let sums = ExactSeries::from_integers(c, "").scale_by_power(24).partial_sums();
    let want = [q(1, 1), q(1, 1), q(25, 24), q(19, 18), q(1637, 1536), q(549, 512)];
    ensure(sums.coefficients == want, "partial sums differ")?;
    Ok("1 0 24 192 3384 51840, partial sums 1 1 25/24 19/18 1637/1536 549/512".into())
}

fn wallis_agreement() -> Outcome {
    for d in 2..=4 {
        let l = Lattice::fcc(d).map_err(|e| e.to_string())?;
        let walks = excursion_series(&l, 12, &CountOptions::default()).map_err(|e| e.to_string())?;
        let w = lgf_series_wallis(d, 12).map_err(|e| e.to_string())?;
        ensure(walks.coefficients == w.coefficients, format!("d={d} differs"))?;
    }
    Ok("d=2,3,4 n<=12 exact".into())
}

fn guess_2d() -> Outcome {
    let s = excursion_series(&Lattice::fcc(2).unwrap(), 59, &CountOptions::default()).map_err(|e| e.to_string())?;
    let ode = guess_ode(&s, &GuessOptions::new(3, 4)).map_err(|e| e.to_string())?.ok_or("no equation")?;
    ensure(ode == golden::fcc_ode(2).unwrap(), format!("got {}", ode.to_text()))?;
    Ok(format!("order {} degree {} from {} terms", ode.order(), ode.degree(), s.len()))
}

fn guess_4d() -> Outcome {
    let l = Lattice::fcc(4).unwrap();
    let long = excursion_series(&l, 119, &CountOptions { threads: threads(), ..Default::default() }).map_err(|e| e.to_string())?;
    let ode = guess_ode(&long.truncate(90), &GuessOptions::new(6, 16)).map_err(|e| e.to_string())?.ok_or("no equation")?;
    let r = apply_ode_to_series(&ode, &long).map_err(|e| e.to_string())?;
    ensure(r.coefficients.iter().all(Zero::is_zero), "residual nonzero on 120 terms")?;
    ensure(ode == golden::fcc_ode(4).unwrap(), "differs from the bundled equation")?;
    Ok(format!("order {} degree {} from 90 terms, residual 0 on 120", ode.order(), ode.degree()))
}

fn multistep_5d() -> Outcome {
    let l = Lattice::fcc(5).unwrap();
    let opts = MultistepOptions { threads: threads(), ..Default::default() };
    let r = multi_step_pipeline(&l, &[2, 1, 2], 150, &opts).map_err(|e| e.to_string())?;
    ensure(r.cross_checked >= 16, format!("cross-checked only {} terms", r.cross_checked))?;
    let s = ExactSeries::from_integers(r.values.clone(), "").scale_by_power(l.coordination());
    let res = apply_ode_to_series(&golden::fcc_ode(5).unwrap(), &s).map_err(|e| e.to_string())?;
    ensure(res.coefficients.iter().all(Zero::is_zero), "bundled equation fails on the multistep terms")?;
    let counted = count_excursions(&l, 15, &CountOptions::default()).map_err(|e| e.to_string())?;
    ensure(r.values[..=15] == counted[..], "differs from direct counts")?;
    Ok(format!("{} terms, {} primes, residual 0, counts agree for n<=15", r.values.len(), r.primes_used))
}

fn indicial() -> Outcome {
    let f = |d| factor_integer_roots(&indicial_polynomial(&golden::fcc_ode(d).unwrap()), "l");
    let (a, b) = (f(4), f(5));
    ensure(a == "l^4" && b == "l^5*(l-1)", format!("{a}, {b}"))?;
    ensure(golden::fcc_ode(6).is_none(), "6D equation should not be bundled")?;
    Ok(format!("{a}; {b}; 6D needs an equation file"))
}

fn six_dimensional_ode() -> Option<LinearODE> {
    let path = std::env::var("LGF_6D_ODE").ok()?;
    let text = std::fs::read_to_string(&path).ok()?;
    LinearODE::from_text(&text).ok()
}

fn indicial_6d(ode: &LinearODE) -> Outcome {
    let a = factor_integer_roots(&indicial_polynomial(ode), "l");
    ensure(a == "l^6*(l-1)^2", a.clone())?;
    Ok(a)
}

fn certificates() -> Outcome {
    for text in [golden::CERT_2D, golden::CERT_2D_STEP1_Z, golden::CERT_2D_STEP1_X2, golden::CERT_2D_STEP2] {
        let r = verify_certificate(Cursor::new(text)).map_err(|e| e.to_string())?;
        ensure(r.passed && r.numeric_agrees, format!("{r:?}"))?;
    }
    let a = golden::annihilators_2d();
    let names: Vec<String> = ["x1", "x2", "z"].iter().map(|s| s.to_string()).collect();
    let op = |t: &str| parse_operator(t, &names).unwrap();
    let combo = a.c1.mul(&a.g1).add(&a.c23.mul(&op("1 : z").mul(&a.g2).add(&a.g3)));
    let telescoper = op("Dz^2 : z (z^2-1)\nDz : 3 z^2-1\n1 : z");
    let b1 = op("1 : (x2-x1^2 x2)/(x1 x2 z-1)");
    let b2 = op("1 : (x2 z-x2^3 z)/(x1 x2 z-1)");
    let full = telescoper.add(&OrePoly::partial(3, 0).mul(&b1)).add(&OrePoly::partial(3, 1).mul(&b2));
    ensure(combo.equals(&full), "cofactor combination differs")?;
    let f = IntegrandSpec::fcc(2).unwrap();
    ensure(certificate_residual(&telescoper, &[(0, b1), (1, b2)], &f).map_err(|e| e.to_string())?.is_zero(), "residual")?;
    Ok("4 certificates, cofactor identity".into())
}

fn digits(d: usize, min_places: usize, ode: Option<LinearODE>) -> Outcome {
    let opts = PipelineOptions {
        source: ode.map(OdeSource::Given),
        count: CountOptions { threads: threads(), ..Default::default() },
        ..Default::default()
    };
    let rep = run_pipeline(d, &opts).map_err(|e| e.to_string())?;
    let refs = golden::reference_digits(d).ok_or("no reference digits")?;
    let r = rep.r.agreement(refs.r);
    ensure(r >= min_places, format!("R agrees to {r} places"))?;
    let mut note = format!("R {} agrees to {r}", &rep.r.text[..rep.r.text.len().min(20)]);
    if d >= 4 {
        let p1 = rep.p1.as_ref().ok_or("no P(1)")?;
        let a = p1.agreement(refs.p1.ok_or("no reference P(1)")?);
        ensure(a >= min_places, format!("P(1) agrees to {a} places"))?;
        note.push_str(&format!(", P(1) agrees to {a}"));
    }
    Ok(note)
}

/// The property suite is its own test binary; run the copy cargo built next
/// to this one.
fn properties() -> Outcome {
    let me = std::env::current_exe().map_err(|e| e.to_string())?;
    let dir = me.parent().ok_or("no parent")?;
    let bin: Option<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let n = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            n.starts_with("properties-") && p.extension().is_none()
        })
        .max_by_key(|p| p.metadata().and_then(|m| m.modified()).ok());
    let bin = bin.ok_or("properties test binary not built; run `cargo test -p lgf --no-run` first")?;
    let out = Command::new(&bin).output().map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    let summary = text.lines().find(|l| l.starts_with("test result")).unwrap_or("").to_string();
    ensure(out.status.success(), summary.clone())?;
    Ok(summary)
}

fn main() {
    let mut rep = Report { failed: 0 };
    let s = Duration::from_secs;
    rep.run("1 count d=4 N=5", s(1), counts_4d);
    rep.run("2 walk counts vs Wallis", s(60), wallis_agreement);
    rep.run("3 2D equation from 60 terms", s(5), guess_2d);
    rep.run("4 4D equation from 90 terms", s(1800), guess_4d);
    rep.run("5 5D multistep (2,1,2) to 150", s(3600), multistep_5d);
    rep.run("6 indicial polynomials", s(1), indicial);
    rep.run("7 certificates", s(5), certificates);
    rep.run("8a digits d=3", s(600), || digits(3, 15, None));
    rep.run("8b digits d=4", s(600), || digits(4, 50, None));
    rep.run("8c digits d=5", s(600), || digits(5, 50, None));
    match six_dimensional_ode() {
        Some(ode) => {
            let o = ode.clone();
            rep.run("6b indicial d=6 (file)", s(1), move || indicial_6d(&o));
            rep.run("8d digits d=6 (file)", s(600), move || digits(6, 50, Some(ode)));
        }
        None => println!("SKIP 6b/8d: set LGF_6D_ODE to a 6D equation file to check it"),
    }
    rep.run("9 property suite", s(300), properties);
    println!("{} failed", rep.failed);
    if rep.failed > 0 {
        std::process::exit(1);
    }
}
