use proptest::prelude::*;

use toric_height::convex::{
    concave_conjugate, conjugate_from_domain, second_derivative_measure, upper_concave_envelope,
};
use toric_height::{Interval, PwlFunction};

fn pwl_with_rays(left: f64, right: f64) -> impl Strategy<Value = PwlFunction> {
    prop::collection::vec((-10.0f64..10.0, -5.0f64..5.0), 1..12).prop_map(move |mut pts| {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let (u, v): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        PwlFunction::new(u, v, left, right).unwrap()
    })
}

/// Ray slopes `(a_inf, -a0)` of a nef divisor.
fn rays() -> impl Strategy<Value = (f64, f64)> {
    (-3.0f64..3.0, 0.0f64..4.0).prop_map(|(a_inf, d)| (a_inf, a_inf - d))
}

fn pwl() -> impl Strategy<Value = PwlFunction> {
    rays().prop_flat_map(|(l, r)| pwl_with_rays(l, r))
}

/// Evaluation points: the breakpoints, midpoints, and far points.
fn probes(f: &PwlFunction) -> Vec<f64> {
    let b = f.breakpoints();
    let mut xs = b.to_vec();
    xs.extend(b.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    xs.extend([b[0] - 7.5, b[b.len() - 1] + 7.5]);
    xs
}

proptest! {
    #[test]
    fn linear_combination_is_pointwise(f in pwl(), g in pwl(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let h = PwlFunction::linear_combination(&f, &g, a, b);
        for x in probes(&f).into_iter().chain(probes(&g)) {
            let expected = a * f.evaluate(x) + b * g.evaluate(x);
            prop_assert!((h.evaluate(x) - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn canonical_form_is_idempotent(f in pwl()) {
        let again = PwlFunction::new(
            f.breakpoints().to_vec(), f.values().to_vec(), f.slope_neg_inf(), f.slope_pos_inf()
        ).unwrap();
        prop_assert_eq!(again, f);
    }

    #[test]
    fn envelope_is_least_concave_majorant(f in pwl()) {
        let env = upper_concave_envelope(&f).unwrap();
        prop_assert!(env.is_concave());
        prop_assert!(env.has_same_rays(&f));
        for x in probes(&f) {
            prop_assert!(env.evaluate(x) >= f.evaluate(x) - 1e-12);
        }
        // every kink of the envelope touches f
        for (&u, &v) in env.breakpoints().iter().zip(env.values()) {
            prop_assert!((v - f.evaluate(u)).abs() <= 1e-9);
        }
        prop_assert_eq!(upper_concave_envelope(&env).unwrap(), env);
    }

    #[test]
    fn measure_mass_is_ray_difference(f in pwl()) {
        let mu = second_derivative_measure(&f);
        let expected = f.slope_neg_inf() - f.slope_pos_inf();
        prop_assert!((mu.total_mass() - expected).abs() <= 1e-9);
        let env = upper_concave_envelope(&f).unwrap();
        prop_assert!(second_derivative_measure(&env).is_nonnegative());
    }

    #[test]
    fn biconjugate_is_envelope(f in pwl()) {
        let domain = Interval::new(f.slope_pos_inf(), f.slope_neg_inf()).unwrap();
        let theta = concave_conjugate(&f, domain).unwrap();
        let back = conjugate_from_domain(&theta, domain);
        let env = upper_concave_envelope(&f).unwrap();
        for x in probes(&f) {
            prop_assert!((back.evaluate(x) - env.evaluate(x)).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn conjugate_matches_brute_force(f in pwl()) {
        prop_assume!(f.slope_neg_inf() > f.slope_pos_inf());
        let domain = Interval::new(f.slope_pos_inf(), f.slope_neg_inf()).unwrap();
        let theta = concave_conjugate(&f, domain).unwrap();
        for k in 0..=8 {
            let s = domain.lo() + domain.length() * k as f64 / 8.0;
            // inf of s·u - f(u) is attained at a breakpoint when s is inside the ray slopes
            let brute = f.breakpoints().iter().map(|&u| s * u - f.evaluate(u)).fold(f64::INFINITY, f64::min);
            prop_assert!((theta.evaluate(s) - brute).abs() <= 1e-9 * (1.0 + brute.abs()));
        }
    }

    #[test]
    fn trapezoid_integral_is_additive(f in pwl(), a in -12.0f64..12.0, t in 0.0f64..1.0, w in 0.0f64..8.0) {
        let (lo, hi) = (a, a + w);
        let mid = lo + t * w;
        let whole = f.integrate(Interval::new(lo, hi).unwrap());
        let parts = f.integrate(Interval::new(lo, mid).unwrap()) + f.integrate(Interval::new(mid, hi).unwrap());
        prop_assert!((whole - parts).abs() <= 1e-9 * (1.0 + whole.abs()));
    }
}
