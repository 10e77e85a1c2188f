//! The tableau simplex against hand-solved programs and a brute-force vertex
//! enumeration.

use kempeflip::scalar::Scalar;
use kempeflip::simplex::{maximize, SimplexStatus};
use kempeflip::Rational;
use proptest::prelude::*;

fn q(num: i64, den: i64) -> Rational {
    Rational::ratio(num, den)
}

#[test]
fn textbook_program() {
    // max 3x + 5y  s.t.  x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  36 at (2, 6).
    let a = vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(2, 1)], vec![q(3, 1), q(2, 1)]];
    let b = vec![q(4, 1), q(12, 1), q(18, 1)];
    let c = vec![q(3, 1), q(5, 1)];
    let sol = maximize(&a, &b, &c);
    assert_eq!(sol.status, SimplexStatus::Optimal);
    assert_eq!(sol.value, q(36, 1));
    assert_eq!(sol.x, vec![q(2, 1), q(6, 1)]);
    assert_eq!(sol.duals, vec![q(0, 1), q(3, 2), q(1, 1)]);
}

#[test]
fn negative_right_hand_sides_need_phase_one() {
    // max -x - y  s.t.  -x - y ≤ -2, x ≤ 3  →  -2.
    let a = vec![vec![-1.0, -1.0], vec![1.0, 0.0]];
    let sol = maximize(&a, &[-2.0, 3.0], &[-1.0, -1.0]);
    assert_eq!(sol.status, SimplexStatus::Optimal);
    assert!((sol.value + 2.0).abs() < 1e-12);
}

#[test]
fn infeasible_and_unbounded() {
    let infeasible = maximize(&[vec![1.0], vec![-1.0]], &[1.0, -2.0], &[1.0]);
    assert_eq!(infeasible.status, SimplexStatus::Infeasible);
    let unbounded = maximize(&[vec![1.0, -1.0]], &[1.0], &[1.0, 0.0]);
    assert_eq!(unbounded.status, SimplexStatus::Unbounded);
}

#[test]
fn degenerate_program_terminates() {
    // A classic cycling example for the largest-coefficient rule.
    let a = vec![
        vec![q(1, 2), q(-11, 2), q(-5, 2), q(9, 1)],
        vec![q(1, 2), q(-3, 2), q(-1, 2), q(1, 1)],
        vec![q(1, 1), q(0, 1), q(0, 1), q(0, 1)],
    ];
    let b = vec![q(0, 1), q(0, 1), q(1, 1)];
    let c = vec![q(10, 1), q(-57, 1), q(-9, 1), q(-24, 1)];
    let sol = maximize(&a, &b, &c);
    assert_eq!(sol.status, SimplexStatus::Optimal);
    assert_eq!(sol.value, q(1, 1));
}

/// Best objective over all vertices of a two-variable polygon.
fn brute_force(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    rows.push((vec![-1.0, 0.0], 0.0));
    rows.push((vec![0.0, -1.0], 0.0));
    let mut best: Option<f64> = None;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (r1, b1) = &rows[i];
            let (r2, b2) = &rows[j];
            let det = r1[0] * r2[1] - r1[1] * r2[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (b1 * r2[1] - r1[1] * b2) / det;
            let y = (r1[0] * b2 - b1 * r2[0]) / det;
            if rows.iter().all(|(r, rhs)| r[0] * x + r[1] * y <= rhs + 1e-9) {
                let value = c[0] * x + c[1] * y;
                best = Some(best.map_or(value, |b: f64| b.max(value)));
            }
        }
    }
    best
}

proptest! {
    #[test]
    fn matches_vertex_enumeration(
        rows in proptest::collection::vec((1i64..10, 1i64..10, 1i64..30), 1..6),
        c in (0i64..10, 0i64..10),
    ) {
        // Positive coefficients and right-hand sides keep the polygon bounded.
        let a: Vec<Vec<f64>> = rows.iter().map(|&(x, y, _)| vec![x as f64, y as f64]).collect();
        let b: Vec<f64> = rows.iter().map(|&(_, _, r)| r as f64).collect();
        let c = [c.0 as f64, c.1 as f64];
        let sol = maximize(&a, &b, &c);
        prop_assert_eq!(sol.status, SimplexStatus::Optimal);
        let best = brute_force(&a, &b, &c).expect("the origin is a vertex");
        prop_assert!((sol.value - best).abs() < 1e-9);
        // Strong duality through the reported shadow prices.
        let dual: f64 = sol.duals.iter().zip(&b).map(|(y, r)| y * r).sum();
        prop_assert!((dual - sol.value).abs() < 1e-9);
        prop_assert!(sol.duals.iter().all(|y| *y >= -1e-12));
    }

    #[test]
    fn lower_bound_rows_match_vertex_enumeration(
        upper in proptest::collection::vec((1i64..10, 1i64..10, 1i64..30), 1..4),
        lower in proptest::collection::vec((1i64..10, 1i64..10, 1i64..30), 1..4),
        c in (-5i64..5, -5i64..5),
    ) {
        // Rows `-a x ≤ -r` force phase one; the upper rows keep the region bounded.
        let mut a: Vec<Vec<f64>> = upper.iter().map(|&(x, y, _)| vec![x as f64, y as f64]).collect();
        let mut b: Vec<f64> = upper.iter().map(|&(_, _, r)| r as f64).collect();
        a.extend(lower.iter().map(|&(x, y, _)| vec![-(x as f64), -(y as f64)]));
        b.extend(lower.iter().map(|&(_, _, r)| -(r as f64)));
        let c = [c.0 as f64, c.1 as f64];
        let sol = maximize(&a, &b, &c);
        match brute_force(&a, &b, &c) {
            None => prop_assert_eq!(sol.status, SimplexStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, SimplexStatus::Optimal);
                prop_assert!((sol.value - best).abs() < 1e-9, "{} vs {}", sol.value, best);
                let dual: f64 = sol.duals.iter().zip(&b).map(|(y, r)| y * r).sum();
                prop_assert!((dual - sol.value).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn exact_and_float_agree(
        rows in proptest::collection::vec((0i64..6, 0i64..6, 0i64..6, 1i64..20), 1..6),
        c in (0i64..5, 0i64..5, 0i64..5),
    ) {
        let a: Vec<Vec<Rational>> = rows.iter().map(|&(x, y, z, _)| vec![q(x, 1), q(y, 1), q(z, 1)]).collect();
        let b: Vec<Rational> = rows.iter().map(|&(_, _, _, r)| q(r, 1)).collect();
        let c = vec![q(c.0, 1), q(c.1, 1), q(c.2, 1)];
        let exact = maximize(&a, &b, &c);
        let af: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect();
        let bf: Vec<f64> = b.iter().map(Scalar::to_f64).collect();
        let cf: Vec<f64> = c.iter().map(Scalar::to_f64).collect();
        let float = maximize(&af, &bf, &cf);
        prop_assert_eq!(exact.status, float.status);
        if exact.status == SimplexStatus::Optimal {
            prop_assert!((exact.value.to_f64() - float.value).abs() < 1e-9);
        }
    }
}
