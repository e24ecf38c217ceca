use lgf::golden;
use lgf::guess::multivariate::{guess_multivariate_recurrence, shift_box, ExactTable, Region, TableSlice};
use lgf::guess::MultivariateRecurrence;
use lgf::lattice::Lattice;
use lgf::walkcount::{count_walk_table, CountOptions};
use num_bigint::BigInt;
use num_traits::Zero;

fn table(d: usize, n: usize) -> lgf::walkcount::WalkTable {
    let opts = CountOptions { radius_cut: Some(n), ..Default::default() };
    count_walk_table(&Lattice::fcc(d).unwrap(), n, &opts).unwrap()
}

fn annihilates(rec: &MultivariateRecurrence, t: &dyn ExactTable, n_max: i64, r: i64) -> usize {
    let mut checked = 0;
    for n in 0..=n_max {
        for x1 in -r..=r {
            for x2 in -r..=r {
                let x: Vec<i64> = [x1, x2].into_iter().chain(std::iter::repeat(0)).take(t.dims()).collect();
                if let Some(v) = rec.residual(t, n, &x) {
                    assert!(v.is_zero(), "nonzero at n={n} x={x:?}");
                    checked += 1;
                }
            }
        }
    }
    checked
}

#[test]
fn recovers_the_stepping_recurrence_in_2d() {
    let t = table(2, 12);
    let s = TableSlice { table: &t, keep: 2 };
    let support = shift_box(&[1, 0], 2, 1);
    let basis = guess_multivariate_recurrence(&s, &Region { n_max: 10, radius: 8 }, &support, 0, 10).unwrap();
    // a_{n+1}(x) - sum over the four diagonal steps of a_n(x - step); on this
    // table the odd-sum points vanish, which adds trivial relations
    let stepping = lgf::guess::multivariate::parse_recurrence_terms(
        "b(n+1,x1,x2) : 1\nb(n,x1-1,x2-1) : -1\nb(n,x1-1,x2+1) : -1\nb(n,x1+1,x2-1) : -1\nb(n,x1+1,x2+1) : -1",
        2,
    )
    .unwrap();
    assert!(annihilates(&stepping, &s, 11, 10) > 100);
    // the stepping recurrence lies in the span of the basis
    let width = support.len();
    let dense = |r: &MultivariateRecurrence| -> Vec<BigInt> {
        support.iter().map(|sh| r.terms.iter().find(|(s2, _)| s2 == sh).map(|(_, c)| c[0].clone()).unwrap_or_default()).collect()
    };
    let target = dense(&stepping);
    let vecs: Vec<Vec<BigInt>> = basis.iter().map(dense).collect();
    let mut m: Vec<Vec<BigInt>> = vecs.clone();
    m.push(target);
    // rank = number of rows minus the nullity of the transpose
    let rank = |rows: &[Vec<BigInt>]| {
        let t: Vec<Vec<BigInt>> = (0..width).map(|c| rows.iter().map(|r| r[c].clone()).collect()).collect();
        rows.len() - lgf::modp::nullspace_exact(&t, rows.len()).len()
    };
    assert_eq!(rank(&vecs), vecs.len());
    assert_eq!(rank(&m), vecs.len());
    for r in &basis {
        assert!(annihilates(r, &s, 11, 10) > 100);
    }
}

#[test]
fn five_dimensional_slice_recurrence() {
    let t = table(5, 15);
    let s = TableSlice { table: &t, keep: 3 };
    let rec = golden::fcc5_slice_recurrence();
    assert_eq!(rec.terms.len(), 18);
    let mut checked = 0;
    for n in 0..15 {
        for x1 in -8..=4 {
            for x2 in -8..=4 {
                for x3 in -8..=4 {
                    if let Some(v) = rec.residual(&s, n, &[x1, x2, x3]) {
                        assert!(v.is_zero(), "n={n} x=({x1},{x2},{x3})");
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 20_000, "{checked}");
}
