//! Interval reasoning for the linear integer atoms: lengths, indices,
//! and string/integer conversion values.
//!
//! The store keeps one integer interval per variable (absent = unbounded)
//! and [`propagate`] runs per-constraint bound tightening to a fixpoint,
//! with a tightening budget and a magnitude clamp so it always
//! terminates. Case splits happen outside, via [`subdivide`], which the
//! engine drives until values become concrete.

use std::collections::BTreeMap;

use crate::ir::{LinExpr, VarId};

/// Bounds wider than this are treated as unbounded.
pub const MAGNITUDE_CLAMP: i64 = 1 << 62;

/// Tightening steps allowed per `propagate` call before it stops early
/// (still sound: any prefix of the fixpoint over-approximates).
pub const TIGHTEN_BUDGET: usize = 10_000;

/// One closed interval over the integers; `None` means unbounded on that
/// side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Iv {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Iv {
    pub const FULL: Iv = Iv { lo: None, hi: None };

    pub fn point(v: i64) -> Iv {
        Iv {
            lo: Some(v),
            hi: Some(v),
        }
    }

    pub fn new(lo: Option<i64>, hi: Option<i64>) -> Iv {
        Iv { lo, hi }
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo.is_none_or(|l| l <= v) && self.hi.is_none_or(|h| v <= h)
    }

    pub fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(l), Some(h)) if l > h)
    }

    pub fn singleton(&self) -> Option<i64> {
        match (self.lo, self.hi) {
            (Some(l), Some(h)) if l == h => Some(l),
            _ => None,
        }
    }

    /// Number of integers in the interval, if finite.
    pub fn width(&self) -> Option<u64> {
        match (self.lo, self.hi) {
            (Some(l), Some(h)) if l <= h => Some((h as i128 - l as i128) as u64 + 1),
            _ => None,
        }
    }
}

/// The range constraint over a linear atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Con {
    /// expr = 0
    Eq(LinExpr),
    /// expr ≥ 0
    Ge(LinExpr),
}

impl Con {
    pub fn expr(&self) -> &LinExpr {
        match self {
            Con::Eq(e) | Con::Ge(e) => e,
        }
    }
}

/// Propagation found an empty interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inconsistent;

/// Map from integer variables to their current interval.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntervalStore {
    ivs: BTreeMap<VarId, Iv>,
}

impl IntervalStore {
    pub fn new() -> Self {
        IntervalStore::default()
    }

    pub fn interval(&self, x: VarId) -> Iv {
        self.ivs.get(&x).copied().unwrap_or(Iv::FULL)
    }

    pub fn set(&mut self, x: VarId, iv: Iv) {
        self.ivs.insert(x, iv);
    }

    /// Lower `x`'s upper bound / raise its lower bound; reports whether
    /// anything changed and whether the interval stayed nonempty.
    pub fn tighten_lo(&mut self, x: VarId, lo: i64) -> Result<bool, Inconsistent> {
        let mut iv = self.interval(x);
        if iv.lo.is_none_or(|l| lo > l) {
            iv.lo = Some(lo);
            if iv.is_empty() {
                self.ivs.insert(x, iv);
                return Err(Inconsistent);
            }
            self.ivs.insert(x, iv);
            return Ok(true);
        }
        Ok(false)
    }

    pub fn tighten_hi(&mut self, x: VarId, hi: i64) -> Result<bool, Inconsistent> {
        let mut iv = self.interval(x);
        if iv.hi.is_none_or(|h| hi < h) {
            iv.hi = Some(hi);
            if iv.is_empty() {
                self.ivs.insert(x, iv);
                return Err(Inconsistent);
            }
            self.ivs.insert(x, iv);
            return Ok(true);
        }
        Ok(false)
    }

    pub fn bind(&mut self, x: VarId, v: i64) -> Result<(), Inconsistent> {
        if !self.interval(x).contains(v) {
            return Err(Inconsistent);
        }
        self.ivs.insert(x, Iv::point(v));
        Ok(())
    }

    /// The value of `x` once its interval is a single point.
    pub fn concrete_value(&self, x: VarId) -> Option<i64> {
        let iv = self.interval(x);
        match (iv.lo, iv.hi) {
            (Some(l), Some(h)) if l == h => Some(l),
            _ => None,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.ivs.keys().copied()
    }

    /// Interval of a whole expression under the store (i128, exact).
    pub fn expr_range(&self, e: &LinExpr) -> (Option<i128>, Option<i128>) {
        let mut lo: Option<i128> = Some(e.constant as i128);
        let mut hi: Option<i128> = Some(e.constant as i128);
        for &(c, v) in &e.terms {
            let iv = self.interval(v);
            let (term_lo, term_hi) = if c >= 0 {
                (
                    iv.lo.map(|b| c as i128 * b as i128),
                    iv.hi.map(|b| c as i128 * b as i128),
                )
            } else {
                (
                    iv.hi.map(|b| c as i128 * b as i128),
                    iv.lo.map(|b| c as i128 * b as i128),
                )
            };
            lo = match (lo, term_lo) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
            hi = match (hi, term_hi) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
        }
        (lo, hi)
    }

    /// Is `e = 0` forced by the current intervals?
    pub fn entails_eq0(&self, e: &LinExpr) -> bool {
        matches!(self.expr_range(e), (Some(0), Some(0)))
    }

    /// Is `e ≥ 0` forced by the current intervals?
    pub fn entails_ge0(&self, e: &LinExpr) -> bool {
        matches!(self.expr_range(e), (Some(l), _) if l >= 0)
    }

    /// Is `e ≥ 0` impossible under the current intervals?
    pub fn refutes_ge0(&self, e: &LinExpr) -> bool {
        matches!(self.expr_range(e), (_, Some(h)) if h < 0)
    }

    /// Is `e = 0` impossible under the current intervals?
    pub fn refutes_eq0(&self, e: &LinExpr) -> bool {
        match self.expr_range(e) {
            (Some(l), _) if l > 0 => true,
            (_, Some(h)) if h < 0 => true,
            _ => false,
        }
    }
}

fn floor_div(n: i128, d: i128) -> i128 {
    let q = n / d;
    let r = n % d;
    if r != 0 && ((r < 0) != (d < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(n: i128, d: i128) -> i128 {
    -floor_div(-n, d)
}

fn clamp_bound(b: i128) -> Option<i64> {
    if b.unsigned_abs() > MAGNITUDE_CLAMP as u128 {
        None
    } else {
        Some(b as i64)
    }
}

/// Tighten every variable's interval against every constraint until
/// nothing changes (or the budget runs out). Sound: every integer
/// solution of the constraint set within the input intervals is within
/// the output intervals.
pub fn propagate(cons: &[Con], store: &mut IntervalStore) -> Result<(), Inconsistent> {
    // Quick sanity pass: already-empty intervals mean an upstream
    // contradiction.
    for iv in store.ivs.values() {
        if iv.is_empty() {
            return Err(Inconsistent);
        }
    }
    let mut budget = TIGHTEN_BUDGET;
    let mut changed = true;
    while changed && budget > 0 {
        changed = false;
        for con in cons {
            let e = con.expr();
            // Constant constraints are pure consistency checks.
            if e.terms.is_empty() {
                let k = e.constant;
                let bad = match con {
                    Con::Eq(_) => k != 0,
                    Con::Ge(_) => k < 0,
                };
                if bad {
                    return Err(Inconsistent);
                }
                continue;
            }
            for i in 0..e.terms.len() {
                let (a, x) = e.terms[i];
                debug_assert!(a != 0);
                // Range of the rest: constant + Σ_{j≠i} coeff·var.
                let mut rest_lo: Option<i128> = Some(e.constant as i128);
                let mut rest_hi: Option<i128> = Some(e.constant as i128);
                for (j, &(c, v)) in e.terms.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let iv = store.interval(v);
                    let (tl, th) = if c >= 0 {
                        (
                            iv.lo.map(|b| c as i128 * b as i128),
                            iv.hi.map(|b| c as i128 * b as i128),
                        )
                    } else {
                        (
                            iv.hi.map(|b| c as i128 * b as i128),
                            iv.lo.map(|b| c as i128 * b as i128),
                        )
                    };
                    rest_lo = match (rest_lo, tl) {
                        (Some(p), Some(q)) => Some(p + q),
                        _ => None,
                    };
                    rest_hi = match (rest_hi, th) {
                        (Some(p), Some(q)) => Some(p + q),
                        _ => None,
                    };
                }
                // Con::Eq: a·x = −rest, rest ∈ [rest_lo, rest_hi]
                //   ⇒ a·x ∈ [−rest_hi, −rest_lo].
                // Con::Ge: a·x ≥ −rest ⇒ a·x ≥ −rest_hi only.
                let ax_lo = rest_hi.map(|r| -r);
                let ax_hi = match con {
                    Con::Eq(_) => rest_lo.map(|r| -r),
                    Con::Ge(_) => None,
                };
                let (x_lo, x_hi) = if a > 0 {
                    (
                        ax_lo.map(|b| ceil_div(b, a as i128)),
                        ax_hi.map(|b| floor_div(b, a as i128)),
                    )
                } else {
                    (
                        ax_hi.map(|b| ceil_div(b, a as i128)),
                        ax_lo.map(|b| floor_div(b, a as i128)),
                    )
                };
                if let Some(lo) = x_lo.and_then(clamp_bound) {
                    if store.tighten_lo(x, lo)? {
                        changed = true;
                        budget = budget.saturating_sub(1);
                    }
                }
                if let Some(hi) = x_hi.and_then(clamp_bound) {
                    if store.tighten_hi(x, hi)? {
                        changed = true;
                        budget = budget.saturating_sub(1);
                    }
                }
                if budget == 0 {
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

/// Split `x`'s interval into two complementary children, small values
/// first. Bounded intervals split at the midpoint; half-bounded ones
/// split off a finite window at the finite end whose width doubles as
/// the engine descends (… [lo,lo], [lo+1, lo+2], [lo+3, lo+6] …).
///
/// Precondition: the interval holds at least two values.
pub fn subdivide(x: VarId, store: &IntervalStore) -> (IntervalStore, IntervalStore) {
    let iv = store.interval(x);
    assert!(
        store.concrete_value(x).is_none() && !iv.is_empty(),
        "subdivide requires an interval with at least two values"
    );
    let (first, second) = match (iv.lo, iv.hi) {
        (Some(lo), Some(hi)) => {
            let mid = lo + (hi - lo) / 2;
            let a = Iv::new(Some(lo), Some(mid));
            let b = Iv::new(Some(mid + 1), Some(hi));
            // Order children so the one nearer zero is explored first.
            if nearest_abs(&a) <= nearest_abs(&b) {
                (a, b)
            } else {
                (b, a)
            }
        }
        (Some(lo), None) => {
            // Window [lo, m]: width 1 at lo = 0, then doubling (m = 2·lo)
            // for positive lo; for negative lo just halve toward zero.
            let m = if lo >= 0 {
                lo.saturating_mul(2).max(lo)
            } else {
                lo / 2
            };
            (Iv::new(Some(lo), Some(m)), Iv::new(Some(m.saturating_add(1)), None))
        }
        (None, Some(hi)) => {
            let m = if hi <= 0 {
                hi.saturating_mul(2).min(hi).saturating_sub(if hi == 0 { 1 } else { 0 })
            } else {
                hi / 2
            };
            (Iv::new(Some(m.saturating_add(1)), Some(hi)), Iv::new(None, Some(m)))
        }
        (None, None) => (Iv::new(Some(0), None), Iv::new(None, Some(-1))),
    };
    let mut s1 = store.clone();
    let mut s2 = store.clone();
    s1.set(x, first);
    s2.set(x, second);
    (s1, s2)
}

fn nearest_abs(iv: &Iv) -> u64 {
    match (iv.lo, iv.hi) {
        (Some(l), Some(h)) => {
            if l <= 0 && 0 <= h {
                0
            } else {
                (l.unsigned_abs()).min(h.unsigned_abs())
            }
        }
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::LinExpr;

    fn v(n: u32) -> VarId {
        VarId(n)
    }

    /// |x| = k + 1 with k ≥ 0 forces |x| ≥ 1.
    #[test]
    fn length_of_successor_is_positive() {
        let x_len = v(0);
        let k = v(1);
        // x_len − k − 1 = 0
        let eq = LinExpr::var(x_len).sub(&LinExpr::var(k)).offset(-1);
        let cons = vec![Con::Eq(eq), Con::Ge(LinExpr::var(k))];
        let mut store = IntervalStore::new();
        store.set(x_len, Iv::new(Some(0), None));
        propagate(&cons, &mut store).unwrap();
        assert_eq!(store.interval(x_len).lo, Some(1));
        assert_eq!(store.interval(k).lo, Some(0));
    }

    #[test]
    fn conflicting_points_are_inconsistent() {
        let n = v(0);
        let cons = vec![
            Con::Eq(LinExpr::var(n).offset(-5)),
            Con::Eq(LinExpr::var(n).offset(-6)),
        ];
        let mut store = IntervalStore::new();
        assert_eq!(propagate(&cons, &mut store), Err(Inconsistent));
    }

    #[test]
    fn sum_bound_boxes_both_addends() {
        let a = v(0);
        let b = v(1);
        // a + b − 3 = 0, a ≥ 0, b ≥ 0.
        let cons = vec![
            Con::Eq(LinExpr::var(a).add(&LinExpr::var(b)).offset(-3)),
            Con::Ge(LinExpr::var(a)),
            Con::Ge(LinExpr::var(b)),
        ];
        let mut store = IntervalStore::new();
        propagate(&cons, &mut store).unwrap();
        assert_eq!(store.interval(a), Iv::new(Some(0), Some(3)));
        assert_eq!(store.interval(b), Iv::new(Some(0), Some(3)));
    }

    #[test]
    fn division_rounding_prunes() {
        // n = 2k and n ∈ [3,4] force k = 2, n = 4.
        let n = v(0);
        let k = v(1);
        let cons = vec![Con::Eq(LinExpr::var(n).sub(&LinExpr::var(k).scale(2)))];
        let mut store = IntervalStore::new();
        store.set(n, Iv::new(Some(3), Some(4)));
        propagate(&cons, &mut store).unwrap();
        assert_eq!(store.concrete_value(k), Some(2));
        assert_eq!(store.concrete_value(n), Some(4));
    }

    #[test]
    fn budget_terminates_long_chains() {
        // y ≤ x − 1 and x ≤ y over a huge interval would ping-pong for a
        // billion steps without the budget.
        let x = v(0);
        let y = v(1);
        let cons = vec![
            // x − y − 1 ≥ 0  (y ≤ x − 1)
            Con::Ge(LinExpr::var(x).sub(&LinExpr::var(y)).offset(-1)),
            // y − x ≥ 0      (x ≤ y)
            Con::Ge(LinExpr::var(y).sub(&LinExpr::var(x))),
        ];
        let mut store = IntervalStore::new();
        store.set(x, Iv::new(Some(0), Some(1_000_000_000)));
        store.set(y, Iv::new(Some(0), Some(1_000_000_000)));
        // Must return (either verdict) in bounded time.
        let _ = propagate(&cons, &mut store);
    }

    #[test]
    fn propagate_is_sound_on_random_systems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xBEEF);
        for _ in 0..300 {
            let nvars = rng.random_range(1..=3usize);
            let ncons = rng.random_range(1..=3usize);
            let mut cons = Vec::new();
            for _ in 0..ncons {
                let mut e = LinExpr::constant(rng.random_range(-8..=8));
                for vi in 0..nvars {
                    let c: i64 = rng.random_range(-3..=3);
                    if c != 0 {
                        e = e.add(&LinExpr::var(v(vi as u32)).scale(c));
                    }
                }
                cons.push(if rng.random_bool(0.5) {
                    Con::Eq(e)
                } else {
                    Con::Ge(e)
                });
            }
            let mut store = IntervalStore::new();
            for vi in 0..nvars {
                store.set(v(vi as u32), Iv::new(Some(-8), Some(8)));
            }
            let result = propagate(&cons, &mut store);

            // Enumerate the box and check every solution survived.
            let mut assignment = vec![-8i64; nvars];
            'outer: loop {
                let sat = cons.iter().all(|con| {
                    let val = con
                        .expr()
                        .eval(&|x: VarId| Some(assignment[x.0 as usize]))
                        .unwrap();
                    match con {
                        Con::Eq(_) => val == 0,
                        Con::Ge(_) => val >= 0,
                    }
                });
                if sat {
                    assert!(
                        result.is_ok(),
                        "solution {assignment:?} exists but propagate said inconsistent"
                    );
                    for (vi, &val) in assignment.iter().enumerate() {
                        assert!(
                            store.interval(v(vi as u32)).contains(val),
                            "solution {assignment:?} escaped interval of v{vi}"
                        );
                    }
                }
                for slot in assignment.iter_mut() {
                    if *slot < 8 {
                        *slot += 1;
                        continue 'outer;
                    }
                    *slot = -8;
                }
                break;
            }
        }
    }

    #[test]
    fn subdivide_midpoint_and_windows() {
        let x = v(0);
        let mut store = IntervalStore::new();
        store.set(x, Iv::new(Some(0), Some(9)));
        let (a, b) = subdivide(x, &store);
        assert_eq!(a.interval(x), Iv::new(Some(0), Some(4)));
        assert_eq!(b.interval(x), Iv::new(Some(5), Some(9)));

        store.set(x, Iv::new(Some(0), None));
        let (a, b) = subdivide(x, &store);
        assert_eq!(a.interval(x), Iv::new(Some(0), Some(0)));
        assert_eq!(b.interval(x), Iv::new(Some(1), None));

        // The next split of the unbounded child doubles the window.
        let (c, d) = subdivide(x, &b);
        assert_eq!(c.interval(x), Iv::new(Some(1), Some(2)));
        assert_eq!(d.interval(x), Iv::new(Some(3), None));
        let (e, f) = subdivide(x, &d);
        assert_eq!(e.interval(x), Iv::new(Some(3), Some(6)));
        assert_eq!(f.interval(x), Iv::new(Some(7), None));

        // Fully unbounded: nonnegative half first.
        store.set(x, Iv::FULL);
        let (g, h) = subdivide(x, &store);
        assert_eq!(g.interval(x), Iv::new(Some(0), None));
        assert_eq!(h.interval(x), Iv::new(None, Some(-1)));
    }

    #[test]
    fn subdivide_children_partition_parent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let x = v(0);
        for _ in 0..200 {
            let lo: i64 = rng.random_range(-20..=18);
            let hi: i64 = rng.random_range(lo + 1..=21);
            let mut store = IntervalStore::new();
            store.set(x, Iv::new(Some(lo), Some(hi)));
            let (a, b) = subdivide(x, &store);
            for val in lo..=hi {
                let ina = a.interval(x).contains(val);
                let inb = b.interval(x).contains(val);
                assert!(
                    ina ^ inb,
                    "{val} in exactly one child of [{lo},{hi}]: a={ina} b={inb}"
                );
            }
        }
    }

    #[test]
    #[should_panic(expected = "at least two values")]
    fn subdivide_rejects_singletons() {
        let x = v(0);
        let mut store = IntervalStore::new();
        store.set(x, Iv::point(3));
        let _ = subdivide(x, &store);
    }

    #[test]
    fn entailment_helpers() {
        let x = v(0);
        let mut store = IntervalStore::new();
        store.set(x, Iv::new(Some(2), Some(2)));
        let e = LinExpr::var(x).offset(-2);
        assert!(store.entails_eq0(&e));
        assert!(store.entails_ge0(&e));
        assert!(!store.refutes_eq0(&e));
        store.set(x, Iv::new(Some(3), Some(9)));
        assert!(!store.entails_eq0(&e));
        assert!(store.entails_ge0(&e));
        assert!(store.refutes_eq0(&e));
        assert!(store.refutes_ge0(&LinExpr::var(x).scale(-1)));
    }
}
