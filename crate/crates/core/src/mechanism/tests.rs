use super::*;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn stable15() -> BranchingMechanism {
    BranchingMechanism::stable(1.0, 1.5).unwrap()
}

fn mixed() -> BranchingMechanism {
    BranchingMechanism::new(0.3, 0.5, LevySpec::Atoms(vec![[1.0, 1.0], [0.2, 3.0]])).unwrap()
}

#[test]
fn psi_examples() {
    let b = BranchingMechanism::brownian();
    assert_eq!(b.psi(2.0).unwrap(), 2.0);
    assert_eq!(stable15().psi(4.0).unwrap(), 8.0);
    for m in [b, stable15(), mixed()] {
        assert_eq!(m.psi(0.0).unwrap(), 0.0);
        assert!(matches!(m.psi(-1.0), Err(Error::Domain(_))));
    }
}

#[test]
fn derivative_examples() {
    assert_eq!(
        BranchingMechanism::brownian().psi_derivatives(3.0).unwrap(),
        (3.0, 1.0)
    );
    // gamma c0 l^{gamma-1} = 1.5 * 2, gamma (gamma-1) c0 l^{gamma-2} = 0.75 * 0.5
    let (d1, d2) = stable15().psi_derivatives(4.0).unwrap();
    assert!(close(d1, 3.0, 1e-15) && close(d2, 0.375, 1e-15));
    let atoms = BranchingMechanism::new(2.0, 0.0, LevySpec::Atoms(vec![[1.0, 1.0]])).unwrap();
    assert_eq!(atoms.psi_derivatives(0.0).unwrap(), (2.0, 1.0));
    assert!(matches!(
        stable15().psi_derivatives(0.0),
        Err(Error::Singularity(_))
    ));
}

#[test]
fn shift_examples() {
    let b = BranchingMechanism::brownian();
    assert_eq!(b.shift(1.0).unwrap().psi(2.0).unwrap(), 4.0);
    assert_eq!(b.shift(1.0).unwrap().psi(0.0).unwrap(), 0.0);
    let s = stable15();
    let v = s.shift(1.0).unwrap().psi(1.0).unwrap();
    assert!(close(v, 2f64.powf(1.5) - 1.0, 1e-15));
    assert!(close(v, 1.8284, 1e-4));
    assert!(b.shift(0.0).is_err());
}

#[test]
fn grey_examples() {
    assert!(BranchingMechanism::brownian().check_grey());
    assert!(stable15().check_grey());
    let linear = BranchingMechanism::new(1.0, 0.0, LevySpec::Atoms(vec![[1.0, 1.0]])).unwrap();
    assert!(!linear.check_grey());
    assert!(mixed().check_grey());
}

#[test]
fn validation_rejects_bad_mechanisms() {
    assert!(BranchingMechanism::new(-1.0, 1.0, LevySpec::None).is_err());
    assert!(BranchingMechanism::new(0.0, 0.0, LevySpec::None).is_err());
    assert!(BranchingMechanism::new(
        0.0,
        0.0,
        LevySpec::Stable {
            c0: 1.0,
            gamma: 2.0
        }
    )
    .is_err());
    assert!(BranchingMechanism::new(
        0.0,
        0.0,
        LevySpec::Stable {
            c0: 0.0,
            gamma: 1.5
        }
    )
    .is_err());
    let err = BranchingMechanism::new(0.0, 1.0, LevySpec::Atoms(vec![[1.0, 1.0], [-1.0, 1.0]]))
        .unwrap_err();
    assert!(matches!(err, Error::Validation { index: Some(1), .. }));
    // gamma = 2 folds into beta
    assert_eq!(
        BranchingMechanism::stable(0.5, 2.0).unwrap(),
        BranchingMechanism::brownian()
    );
}

#[test]
fn solve_v_examples() {
    let b = MechanismAnalytics::with_defaults(BranchingMechanism::brownian());
    assert!(close(b.solve_v(1.0).unwrap(), 2.0, 1e-12));
    assert!(close(b.solve_v(2.0).unwrap(), 1.0, 1e-12));
    let s = MechanismAnalytics::with_defaults(stable15());
    assert!(close(s.solve_v(1.0).unwrap(), 4.0, 1e-12));
    assert!(matches!(b.solve_v(0.0), Err(Error::Domain(_))));
    let linear = BranchingMechanism::new(1.0, 0.0, LevySpec::Atoms(vec![[1.0, 1.0]])).unwrap();
    let l = MechanismAnalytics::with_defaults(linear);
    assert!(matches!(l.solve_v(1.0), Err(Error::Unsupported(_))));
}

/// Independent oracle: `int_v^inf dl/psi = int_0^1 2 v / (w^3 psi(v/w^2)) dw`
/// (substituting `l = v / w^2`), composite Simpson on a fixed grid. Only
/// valid when `beta > 0`, where the integrand behaves like `2w/(beta v)` near
/// `w = 0` and stays smooth even with a stable part.
fn tail_oracle(m: &BranchingMechanism, v: f64) -> f64 {
    let n = 200_000usize;
    let h = 1.0 / n as f64;
    let f = |w: f64| {
        if w == 0.0 {
            0.0
        } else {
            2.0 * v / (w * w * w * m.psi(v / (w * w)).unwrap())
        }
    };
    let mut s = f(0.0) + f(1.0);
    for k in 1..n {
        let c = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += c * f(k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn numeric_tail_integral_matches_oracle() {
    let mechs = [
        mixed(),
        BranchingMechanism::new(
            0.0,
            0.5,
            LevySpec::Stable {
                c0: 1.0,
                gamma: 1.5,
            },
        )
        .unwrap(),
        BranchingMechanism::new(
            0.25,
            0.0,
            LevySpec::Stable {
                c0: 2.0,
                gamma: 1.7,
            },
        )
        .unwrap(),
    ];
    for m in &mechs[..2] {
        let an = MechanismAnalytics::with_defaults(m.clone());
        for v in [0.1, 1.0, 5.0] {
            let got = an.tail_integral(v).unwrap();
            let want = tail_oracle(m, v);
            assert!(
                close(got, want, 1e-9 * want.max(1.0)),
                "{m:?} v={v}: {got} vs {want}"
            );
        }
    }
    // stable + drift: compare against the closed form of the pure stable part
    // plus a direct quadrature of the difference of integrands
    let an = MechanismAnalytics::with_defaults(mechs[2].clone());
    let v = 1.0;
    let got = an.tail_integral(v).unwrap();
    let pure = v.powf(-0.7) / (2.0 * 0.7);
    // 1/(c l^g + a l) = 1/(c l^g) - a l/(c l^g (c l^g + a l)); the correction
    // is integrable in u = ln l and decays like e^{-(2g-2)u}
    let mut corr = 0.0;
    let du = 1e-3;
    let mut u = 0.0f64;
    while u < 200.0 {
        let mid = u + 0.5 * du;
        let l = v * mid.exp();
        let lead = 2.0 * l.powf(1.7);
        corr += l * 0.25 * l / (lead * (lead + 0.25 * l)) * du;
        u += du;
    }
    assert!(close(got, pure - corr, 1e-6), "{got} vs {}", pure - corr);
}

#[test]
fn solve_v_numeric_path_hits_target() {
    let an = MechanismAnalytics::with_defaults(mixed());
    for a in [0.05, 0.5, 1.0, 3.0] {
        let v = an.solve_v(a).unwrap();
        let t = an.tail_integral(v).unwrap();
        assert!(close(t, a, 1e-10 * a), "a={a}: T(v)={t}");
        assert!(close(tail_oracle(an.mechanism(), v), a, 1e-8 * a.max(1.0)));
    }
}

#[test]
fn psi_inverse_examples() {
    let b = MechanismAnalytics::with_defaults(BranchingMechanism::brownian());
    assert!(close(b.psi_inverse(2.0).unwrap(), 2.0, 1e-15));
    let s = MechanismAnalytics::with_defaults(stable15());
    assert!(close(s.psi_inverse(8.0).unwrap(), 4.0, 1e-14));
    for an in [&b, &s, &MechanismAnalytics::with_defaults(mixed())] {
        assert_eq!(an.psi_inverse(0.0).unwrap(), 0.0);
    }
}

#[test]
fn g_and_bismut_laplace_examples() {
    let b = MechanismAnalytics::with_defaults(BranchingMechanism::brownian());
    assert!(close(b.g_eval(2.0).unwrap(), 2.0, 1e-14));
    assert!(close(b.g_eval(0.5).unwrap(), 1.0, 1e-14));
    let s = MechanismAnalytics::with_defaults(stable15());
    assert!(close(s.g_eval(8.0).unwrap(), 3.0, 1e-13));

    assert!(close(b.bismut_laplace(0.5, 0.0).unwrap(), 1.0, 1e-14));
    assert!(close(b.bismut_laplace(2.0, 2.0).unwrap(), 0.25, 1e-14));
    assert!(close(s.bismut_laplace(8.0, 1.0).unwrap(), 0.25, 1e-14));
}

#[test]
fn laplace_cross_check_against_mass_identity() {
    for m in [BranchingMechanism::brownian(), stable15(), mixed()] {
        let an = MechanismAnalytics::with_defaults(m.clone());
        for q in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let lhs = an.bismut_laplace(m.psi(q).unwrap(), 0.0).unwrap();
            let d1 = m.psi_derivatives(q).unwrap().0;
            assert!(close(lhs * d1, 1.0, 1e-8), "{m:?} q={q}");
        }
    }
}

#[test]
fn pruned_mass_moments_brownian() {
    let b = MechanismAnalytics::with_defaults(BranchingMechanism::brownian());
    let (m1, m2) = b.pruned_mass_moments(2.0).unwrap();
    assert_eq!(m1, 0.5);
    assert_eq!(m2, 0.125);
}

#[test]
fn z_moment_examples_and_rayleigh_reduction() {
    assert!(close(z_moment(2.0, 0.5, 2).unwrap(), 2.0, 1e-12));
    assert!(close(
        z_moment(2.0, 0.5, 1).unwrap(),
        (std::f64::consts::PI / 2.0).sqrt(),
        1e-12
    ));
    assert!(close(z_moment(2.0, 0.5, 1).unwrap(), 1.25331, 1e-5));
    assert!(close(z_moment(2.0, 0.5, 4).unwrap(), 8.0, 1e-11));
    for n in 1..=5u32 {
        let rayleigh = 2f64.powf(f64::from(n) / 2.0) * libm::tgamma(1.0 + f64::from(n) / 2.0);
        let z = z_moment(2.0, 0.5, n).unwrap();
        assert!(((z - rayleigh) / rayleigh).abs() <= 1e-10, "n={n}");
    }
    assert!(z_moment(1.0, 1.0, 1).is_err());
    assert!(z_moment(1.5, 1.0, 0).is_err());
}

#[test]
fn brownian_tail_examples() {
    let b = BranchingMechanism::brownian();
    assert!(close(
        brownian_canonical_tail(&b, 2.0 / std::f64::consts::PI).unwrap(),
        1.0,
        1e-15
    ));
    assert!(close(
        brownian_canonical_tail(&b, 0.02).unwrap(),
        5.6419,
        1e-4
    ));
    let e = 0.013;
    assert!(close(
        brownian_canonical_tail(&b, 4.0 * e).unwrap(),
        0.5 * brownian_canonical_tail(&b, e).unwrap(),
        1e-14
    ));
    assert!(matches!(
        brownian_canonical_tail(&stable15(), 0.1),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn tolerances_are_validated() {
    let b = BranchingMechanism::brownian();
    assert!(MechanismAnalytics::new(b.clone(), 1e-3, 1e-8).is_err());
    assert!(MechanismAnalytics::new(b.clone(), 1e-8, 0.0).is_err());
    assert!(MechanismAnalytics::new(b, 1e-4, 1e-4).is_ok());
}

#[test]
fn config_dictionary_shape() {
    let m = BranchingMechanism::new(
        0.0,
        0.0,
        LevySpec::Stable {
            c0: 1.0,
            gamma: 1.5,
        },
    )
    .unwrap();
    assert_eq!(
        serde_json::to_string(&m).unwrap(),
        r#"{"alpha":0.0,"beta":0.0,"levy":{"stable":{"c0":1.0,"gamma":1.5}}}"#
    );
    let json = r#"{"alpha":0.1,"beta":0.5,"levy":{"atoms":[[1.0,2.5],[0.3,1.0]]}}"#;
    let m: BranchingMechanism = serde_json::from_str(json).unwrap();
    assert_eq!(serde_json::to_string(&m).unwrap(), json);
    let m: BranchingMechanism =
        serde_json::from_str(r#"{"alpha":0,"beta":0.5,"levy":"none"}"#).unwrap();
    assert!(m.is_brownian());
    assert!(
        serde_json::from_str::<BranchingMechanism>(r#"{"alpha":0,"beta":0,"levy":"none"}"#)
            .is_err()
    );
}

fn arb_mechanism() -> impl Strategy<Value = BranchingMechanism> {
    prop_oneof![
        (0.0..2.0f64, 0.01..3.0f64).prop_map(|(a, b)| BranchingMechanism::new(
            a,
            b,
            LevySpec::None
        )
        .unwrap()),
        (0.0..2.0f64, 0.0..2.0f64, 0.1..3.0f64, 1.05..1.95f64).prop_map(|(a, b, c0, g)| {
            BranchingMechanism::new(a, b, LevySpec::Stable { c0, gamma: g }).unwrap()
        }),
        (
            0.0..2.0f64,
            0.01..2.0f64,
            prop::collection::vec((0.01..5.0f64, 0.01..5.0f64), 1..5)
        )
            .prop_map(|(a, b, atoms)| {
                let atoms = atoms.into_iter().map(|(r, m)| [r, m]).collect();
                BranchingMechanism::new(a, b, LevySpec::Atoms(atoms)).unwrap()
            }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn psi_and_derivative_are_monotone(m in arb_mechanism(), x in 0.001..50.0f64, y in 0.001..50.0f64) {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let (p_lo, p_hi) = (m.psi(lo).unwrap(), m.psi(hi).unwrap());
        let (d_lo, d_hi) = (m.psi_derivatives(lo).unwrap().0, m.psi_derivatives(hi).unwrap().0);
        prop_assert!(p_lo <= p_hi + 1e-12 * p_hi.abs().max(1.0));
        prop_assert!(d_lo <= d_hi + 1e-12 * d_hi.abs().max(1.0));
        prop_assert!(p_lo >= 0.0);
    }

    #[test]
    fn shift_is_consistent(m in arb_mechanism(), q in 0.01..10.0f64, l in 0.0..10.0f64) {
        let s = m.shift(q).unwrap();
        let direct = m.psi(l + q).unwrap() - m.psi(q).unwrap();
        prop_assert!((s.psi(l).unwrap() - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        prop_assert_eq!(s.psi(0.0).unwrap(), 0.0);
        prop_assert_eq!(s.psi_derivatives(0.0).unwrap().0, m.psi_derivatives(q).unwrap().0);
        prop_assert!(s.psi_derivatives(0.0).unwrap().0 > 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences(m in arb_mechanism(), l in 0.05..20.0f64) {
        let h = 1e-6;
        let (d1, d2) = m.psi_derivatives(l).unwrap();
        let fd1 = (m.psi(l + h).unwrap() - m.psi(l - h).unwrap()) / (2.0 * h);
        let g = |x: f64| m.psi_derivatives(x).unwrap().0;
        let fd2 = (g(l + h) - g(l - h)) / (2.0 * h);
        prop_assert!((d1 - fd1).abs() <= 1e-5 * d1.abs().max(1e-3), "d1 {} fd {}", d1, fd1);
        prop_assert!((d2 - fd2).abs() <= 1e-5 * d2.abs().max(1e-3), "d2 {} fd {}", d2, fd2);
    }

    #[test]
    fn json_round_trip_is_exact(m in arb_mechanism()) {
        let s = serde_json::to_string(&m).unwrap();
        let back: BranchingMechanism = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_and_v_round_trip(m in arb_mechanism(), y in 0.0..100.0f64, a in 0.01..5.0f64) {
        let an = MechanismAnalytics::with_defaults(m.clone());
        let l = an.psi_inverse(y).unwrap();
        prop_assert!((m.psi(l).unwrap() - y).abs() <= 1e-10 * y.max(1.0));
        let v = an.solve_v(a).unwrap();
        let t = an.tail_integral(v).unwrap();
        prop_assert!((t - a).abs() <= 1e-9 * a, "a={} T={}", a, t);
    }
}
