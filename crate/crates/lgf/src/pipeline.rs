//! End-to-end evaluation of P(1) and the return probability in dimension d:
//! series terms, differential equation, partial-sum recurrence, forward run,
//! extrapolation.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::golden;
use crate::guess::{guess_ode, GuessOptions};
use crate::lattice::Lattice;
use crate::numerics::{
    detect_divergence, extend_sequence, limit_of_partial_sums, return_probability_digits, Digits, ExtendMode, SequenceValues,
};
use crate::operator::{LinearODE, LinearRecurrence};
use crate::ore::{apply_ode_to_series, ode_to_recurrence, quotient_closure};
use crate::series::ExactSeries;
use crate::walkcount::{excursion_series, CountOptions};

/// Where the differential equation comes from.
#[derive(Debug, Clone)]
pub enum OdeSource {
    /// Guessed from this many counted terms.
    Guess { terms: usize },
    /// The bundled equation (d = 2, 4, 5).
    Bundled,
    /// Supplied by the caller, e.g. read from a file.
    Given(LinearODE),
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub source: Option<OdeSource>,
    /// Decimal places wanted; sets the working precision.
    pub digits: usize,
    /// Last index of the partial-sum sequence.
    pub terms: usize,
    /// Number of inverse powers in the tail fit.
    pub fit_order: usize,
    /// Counted terms that every equation must reproduce.
    pub check_terms: usize,
    pub divergence_bound: f64,
    pub count: CountOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            source: None,
            digits: 50,
            terms: 2000,
            fit_order: 30,
            check_terms: 20,
            divergence_bound: 1e6,
            count: CountOptions::default(),
        }
    }
}

impl PipelineOptions {
    fn source_for(&self, d: usize) -> Result<OdeSource> {
        if let Some(s) = &self.source {
            return Ok(s.clone());
        }
        Ok(match d {
            2 => OdeSource::Guess { terms: 60 },
            3 => OdeSource::Guess { terms: 80 },
            4 => OdeSource::Guess { terms: 100 },
            5 => OdeSource::Bundled,
            _ => {
                return Err(Error::Unsupported(format!(
                    "no differential equation is available for d={d}; supply one with --ode-file"
                )))
            }
        })
    }

    fn precision(&self) -> u32 {
        // the fit amplifies input errors by roughly 10^(fit_order) on [N/2, N]
        ((self.digits + self.fit_order + 20) as f64 * std::f64::consts::LOG2_10) as u32 + 64
    }
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub dimension: usize,
    pub ode: LinearODE,
    pub ode_origin: String,
    pub closure: LinearODE,
    pub recurrence: LinearRecurrence,
    /// Counted terms the equation was checked against.
    pub checked_terms: usize,
    pub terms: usize,
    pub divergent: bool,
    pub p1: Option<Digits>,
    pub r: Digits,
    pub timings: Vec<(&'static str, Duration)>,
}

impl PipelineReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "d = {}\node: order {}, degree {} ({})\nclosure: order {}, degree {}\nrecurrence: order {}, degree {}\nchecked against {} counted terms\n",
            self.dimension,
            self.ode.order(),
            self.ode.degree(),
            self.ode_origin,
            self.closure.order(),
            self.closure.degree(),
            self.recurrence.order(),
            self.recurrence.degree(),
            self.checked_terms,
        );
        if self.divergent {
            s.push_str(&format!("partial sums diverge (checked to n = {})\nR = 1\n", self.terms));
        } else {
            if let Some(p1) = &self.p1 {
                s.push_str(&p1.line("P(1)"));
                s.push('\n');
            }
            s.push_str(&self.r.line("R"));
            s.push('\n');
        }
        s
    }
}

/// Smallest start index past every nonnegative integer root of the leading
/// coefficient below `bound`.
fn regular_start(rec: &LinearRecurrence, bound: i64) -> usize {
    let lead = rec.coeffs.last().expect("nonempty recurrence");
    (0..bound).filter(|&n| lead.eval_i64(n).is_zero()).map(|n| n as usize + 1).max().unwrap_or(0)
}

fn count_series(lattice: &Lattice, n: usize, opts: &CountOptions) -> Result<ExactSeries> {
    excursion_series(lattice, n, opts)
}

/// Runs the whole chain for dimension d.
pub fn run_pipeline(d: usize, opts: &PipelineOptions) -> Result<PipelineReport> {
    let lattice = Lattice::fcc(d)?;
    let source = opts.source_for(d)?;
    let mut timings = Vec::new();
    let t = Instant::now();

    let (ode, origin, counted) = match source {
        OdeSource::Guess { terms } => {
            let s = count_series(&lattice, terms, &opts.count)?;
            let ode = guess_ode(&s, &GuessOptions::new(6, 16))?
                .ok_or_else(|| Error::InsufficientData(format!("no differential equation fits {} counted terms", terms + 1)))?;
            (ode, format!("guessed from {} counted terms", terms + 1), s)
        }
        OdeSource::Bundled => {
            let ode = golden::fcc_ode(d).ok_or_else(|| Error::Unsupported(format!("no bundled equation for d={d}")))?;
            let s = count_series(&lattice, opts.check_terms, &opts.count)?;
            (ode, "bundled".to_string(), s)
        }
        OdeSource::Given(ode) => {
            let s = count_series(&lattice, opts.check_terms, &opts.count)?;
            (ode, "supplied".to_string(), s)
        }
    };
    timings.push(("series and equation", t.elapsed()));

    let residual = apply_ode_to_series(&ode, &counted)?;
    if let Some(i) = residual.coefficients.iter().position(|c| !c.is_zero()) {
        return Err(Error::Verification(format!("the equation fails on the counted series at z^{i}")));
    }
    let checked_terms = counted.len();

    // more series terms from the equation's own recurrence, enough to seed
    // the partial-sum recurrence
    let t = Instant::now();
    let closure = quotient_closure(&ode);
    let recurrence = ode_to_recurrence(&closure);
    let series_rec = ode_to_recurrence(&ode);
    let need_f = recurrence.order() + regular_start(&recurrence, opts.terms as i64) + 1;
    let need_a = series_rec.order() + regular_start(&series_rec, need_f as i64);
    if need_a > counted.len() {
        return Err(Error::InsufficientData(format!(
            "the series recurrence needs {need_a} initial terms, {} were counted",
            counted.len()
        )));
    }
    let SequenceValues::Exact(a) = extend_sequence(&series_rec, &counted.coefficients, need_f.max(counted.len()), ExtendMode::Exact)? else {
        unreachable!()
    };
    let f = ExactSeries::new(a, "").partial_sums();
    let initials: Vec<BigRational> = f.coefficients[..need_f].to_vec();
    let values = extend_sequence(&recurrence, &initials, opts.terms, ExtendMode::Exact)?;
    timings.push(("recurrence run", t.elapsed()));

    let t = Instant::now();
    let divergent = detect_divergence(&values, opts.divergence_bound);
    let (p1, r) = if divergent {
        let one = crate::numerics::BigFloat::from_i64(1, 64);
        (None, Digits { value: one, places: 0, text: "1".into() })
    } else {
        let p1 = limit_of_partial_sums(&values, d, opts.fit_order, opts.precision())?;
        let r = return_probability_digits(&p1)?;
        (Some(p1), r)
    };
    timings.push(("extrapolation", t.elapsed()));

    Ok(PipelineReport {
        dimension: d,
        ode,
        ode_origin: origin,
        closure,
        recurrence,
        checked_terms,
        terms: opts.terms,
        divergent,
        p1,
        r,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_dimensions_need_an_equation() {
        assert!(matches!(run_pipeline(6, &PipelineOptions::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn two_dimensions_diverge() {
        let opts = PipelineOptions { terms: 600, ..Default::default() };
        let rep = run_pipeline(2, &opts).unwrap();
        assert!(rep.divergent);
        assert_eq!(rep.r.text, "1");
    }

    #[test]
    fn wrong_equation_is_rejected() {
        let ode = golden::fcc_ode(4).unwrap();
        let opts = PipelineOptions { source: Some(OdeSource::Given(ode)), check_terms: 10, ..Default::default() };
        assert!(matches!(run_pipeline(5, &opts), Err(Error::Verification(_))));
    }
}
