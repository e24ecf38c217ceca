use std::io::Cursor;

use lgf::golden;
use lgf::ore::certificate::certificate_residual;
use lgf::ore::{apply_operator_to_integrand, parse_operator, verify_certificate, IntegrandSpec, OrePoly};

fn check(text: &str) -> lgf::ore::CertReport {
    verify_certificate(Cursor::new(text)).unwrap()
}

#[test]
fn bundled_certificates_verify() {
    for text in [golden::CERT_2D, golden::CERT_2D_STEP1_Z, golden::CERT_2D_STEP1_X2, golden::CERT_2D_STEP2] {
        let r = check(text);
        assert!(r.passed, "{text}\n{r:?}");
        assert!(r.numeric_agrees);
        assert!(r.terms > 0);
    }
}

#[test]
fn perturbed_certificate_fails() {
    let bad = golden::CERT_2D.replace("1 : z\n", "1 : z + 1\n");
    let r = check(&bad);
    assert!(!r.passed);
    assert!(r.first_failing.is_some());
    assert!(r.numeric_agrees);
}

#[test]
fn telescoper_with_integration_variable_is_rejected() {
    let bad = golden::CERT_2D.replace("1 : z\n", "1 : z + x1\n");
    assert!(matches!(verify_certificate(Cursor::new(bad)), Err(lgf::Error::Validation(_))));
}

#[test]
fn malformed_certificates() {
    assert!(verify_certificate(Cursor::new("")).is_err());
    assert!(verify_certificate(Cursor::new("# lgf-cert vars=x1,x2,z integrand=fcc d=2\nDz : 1\n")).is_err());
    assert!(verify_certificate(Cursor::new("# lgf-cert vars=a,b integrand=fcc d=2\n")).is_err());
}

#[test]
fn annihilators_kill_the_integrand() {
    let f = IntegrandSpec::fcc(2).unwrap();
    let a = golden::annihilators_2d();
    for g in [&a.g1, &a.g2, &a.g3] {
        assert!(apply_operator_to_integrand(g, &f).unwrap().is_zero());
    }
}

#[test]
fn cofactor_combination_is_the_telescoping_operator() {
    let a = golden::annihilators_2d();
    let names: Vec<String> = ["x1", "x2", "z"].iter().map(|s| s.to_string()).collect();
    let z = parse_operator("1 : z", &names).unwrap();
    let combo = a.c1.mul(&a.g1).add(&a.c23.mul(&z.mul(&a.g2).add(&a.g3)));
    let telescoper = parse_operator("Dz^2 : z (z^2-1)\nDz : 3 z^2-1\n1 : z", &names).unwrap();
    let b1 = parse_operator("1 : (x2-x1^2 x2)/(x1 x2 z-1)", &names).unwrap();
    let b2 = parse_operator("1 : (x2 z-x2^3 z)/(x1 x2 z-1)", &names).unwrap();
    let full = telescoper
        .add(&OrePoly::partial(3, 0).mul(&b1))
        .add(&OrePoly::partial(3, 1).mul(&b2));
    assert!(combo.equals(&full));

    let f = IntegrandSpec::fcc(2).unwrap();
    assert!(certificate_residual(&telescoper, &[(0, b1), (1, b2)], &f).unwrap().is_zero());
}
