//! Transform properties, runnable at any case count.

use moval::transforms::{granularize, TransformKind, EXP_ARG_MAX};
use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

type Check = fn(&mut TestRunner) -> Result<(), String>;

fn kinds() -> impl Strategy<Value = TransformKind> {
    select(TransformKind::BUILTIN.to_vec())
}

fn concave_kinds() -> impl Strategy<Value = TransformKind> {
    select(vec![
        TransformKind::Sfella,
        TransformKind::Ela,
        TransformKind::Lela,
        TransformKind::SebaAlignment,
    ])
}

fn loss_averse_kinds() -> impl Strategy<Value = TransformKind> {
    select(vec![TransformKind::Sfella, TransformKind::Ela, TransformKind::Lela])
}

fn scale() -> impl Strategy<Value = f64> {
    0.01f64..=100.0
}

fn run<S: Strategy>(runner: &mut TestRunner, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner.run(&s, f).map_err(|e| e.to_string())
}

fn zero_fixpoint(r: &mut TestRunner) -> Result<(), String> {
    run(r, (kinds(), scale()), |(k, c)| {
        prop_assert_eq!(k.eval(c, 0.0), 0.0);
        Ok(())
    })
}

fn monotone(r: &mut TestRunner) -> Result<(), String> {
    let c = select(vec![0.01, 1.0, 100.0]);
    run(r, (kinds(), c, -1e6f64..1e6, -1e6f64..1e6), |(k, c, x, y)| {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        prop_assert!(k.eval(c, lo) <= k.eval(c, hi), "{} c={} f({})={} f({})={}", k, c, lo, k.eval(c, lo), hi, k.eval(c, hi));
        Ok(())
    })
}

/// Pairs are drawn where the exponent is unclamped; SebaAlignment only on
/// its non-positive branch.
fn concave(r: &mut TestRunner) -> Result<(), String> {
    run(r, (concave_kinds(), scale(), -1.0f64..1.0, -1.0f64..1.0), |(k, c, u, v)| {
        let span = EXP_ARG_MAX / c;
        let (mut x, mut y) = (u * span, v * span);
        if k == TransformKind::SebaAlignment {
            x = -x.abs();
            y = -y.abs();
        }
        let (fx, fy) = (k.eval(c, x), k.eval(c, y));
        let mid = k.eval(c, (x + y) / 2.0);
        let tol = 1e-9 + 1e-12 * (fx.abs() + fy.abs());
        prop_assert!(mid >= (fx + fy) / 2.0 - tol, "{} c={} x={} y={}", k, c, x, y);
        Ok(())
    })
}

fn loss_aversion(r: &mut TestRunner) -> Result<(), String> {
    run(r, (loss_averse_kinds(), scale(), 0.0f64..1e6), |(k, c, x)| {
        prop_assert!(k.eval(c, -x).abs() >= k.eval(c, x).abs(), "{} c={} x={}", k, c, x);
        Ok(())
    })
}

fn sfella_smooth_at_zero(r: &mut TestRunner) -> Result<(), String> {
    run(r, scale(), |c| {
        let f = |x: f64| TransformKind::Sfella.eval(c, x);
        prop_assert!(f(1e-9).abs() < 1e-8 * c.max(1.0));
        prop_assert!(f(-1e-9).abs() < 1e-8 * c.max(1.0));
        let h = 1e-6;
        let right = (f(h) - f(0.0)) / h;
        let left = (f(0.0) - f(-h)) / h;
        prop_assert!((right - c).abs() <= 1e-3 * c, "c={} right={}", c, right);
        prop_assert!((left - c).abs() <= 1e-3 * c, "c={} left={}", c, left);
        Ok(())
    })
}

/// Strictly below 1 while `exp(-cx)` is representable next to 1.
fn ela_bounded(r: &mut TestRunner) -> Result<(), String> {
    run(r, (scale(), -1e9f64..1e9), |(c, x)| {
        let f = TransformKind::Ela.eval(c, x);
        prop_assert!(f <= 1.0);
        if c * x <= 30.0 {
            prop_assert!(f < 1.0);
        }
        Ok(())
    })
}

fn lela_slope(r: &mut TestRunner) -> Result<(), String> {
    run(r, (scale(), -1.0f64..1.0, 1e-6f64..1.0), |(c, u, h)| {
        let x = u * EXP_ARG_MAX / c;
        let h = h / c;
        let f = |x: f64| TransformKind::Lela.eval(c, x);
        let slope = (f(x + h) - f(x)) / h;
        prop_assert!(slope >= c * (1.0 - 1e-6), "c={} x={} slope={}", c, x, slope);
        Ok(())
    })
}

fn finite_everywhere(r: &mut TestRunner) -> Result<(), String> {
    run(r, (kinds(), scale(), -1e9f64..1e9), |(k, c, x)| {
        prop_assert!(k.eval(c, x).is_finite(), "{} c={} x={}", k, c, x);
        prop_assert!(k.eval(c, 1e9).is_finite() && k.eval(c, -1e9).is_finite());
        Ok(())
    })
}

fn granularity(r: &mut TestRunner) -> Result<(), String> {
    let g = prop_oneof![Just(0.01), Just(0.1), Just(1.0), Just(100.0), 1e-3f64..1e3];
    run(r, (-1e6f64..1e6, g), |(x, g)| {
        let once = granularize(x, g);
        prop_assert_eq!(granularize(once, g), once);
        prop_assert!((x - once).abs() <= g / 2.0 + 1e-12 * x.abs().max(1.0), "x={} g={} -> {}", x, g, once);
        let steps = once / g;
        prop_assert!((steps - steps.round()).abs() < 1e-6, "x={} g={} -> {}", x, g, once);
        prop_assert_eq!(granularize(x, 0.0), x);
        Ok(())
    })
}

pub const SUITE: [(&str, Check); 9] = [
    ("zero fixpoint", zero_fixpoint),
    ("monotonicity", monotone),
    ("concavity", concave),
    ("loss aversion", loss_aversion),
    ("SFELLA C1 at zero", sfella_smooth_at_zero),
    ("ELA bound", ela_bounded),
    ("LELA slope", lela_slope),
    ("overflow safety", finite_everywhere),
    ("granularity", granularity),
];

/// Runs every property with `cases` random cases each and a fixed seed.
pub fn run_suite(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    SUITE
        .iter()
        .map(|(name, check)| {
            let config = Config {
                cases,
                failure_persistence: None,
                ..Config::default()
            };
            let mut runner = TestRunner::new_with_rng(
                config,
                proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
            );
            (*name, check(&mut runner))
        })
        .collect()
}
