//! The potential `H`, realizable configuration templates and the family of
//! linear programs that select flip parameters.
//!
//! Instances are built with exact rational coefficients. Each `min` term of
//! a configuration constraint is linearized by emitting one row per choice
//! of branch, which is equivalent because `−min(q, q') = max(−q, −q')`.
//! Solving goes through the dual problem, whose tableau has one row per
//! free variable and one column per primal row.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{Configuration, Special};
use crate::error::{Error, Result};
use crate::params::FlipParams;
use crate::scalar::{max_of, min_of, parse_rational, Rational, Scalar};
use crate::simplex::{maximize, SimplexStatus};

fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn rat_ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// `H(A, B; a, b)` for the given flip parameters.
///
/// For `c ∉ {σ(v), τ(v)}` this is
/// `(A − a_max − 1)p_A + (B − b_max − 1)p_B + Σ (a_i q_i + b_i q'_i − min(q_i, q'_i))`
/// with `q_i = p_{a_i} − p_A·[i = i_max]` and `q'_i = p_{b_i} − p_B·[i = j_max]`
/// (the correction applies only when the maximum is positive). For
/// `c = τ(v)` it is `(A − a_max − 2)p_A + Σ a_i q_i` and for `c = σ(v)` the
/// mirrored expression.
pub fn h_value<T: Scalar>(cfg: &Configuration, p: &FlipParams<T>) -> T {
    let (q, q_prime) = remainders(cfg, p);
    let p_a = p.get(cfg.big_a);
    let p_b = p.get(cfg.big_b);
    let weighted = |sizes: &[usize], rest: &[T]| {
        sizes.iter().zip(rest).fold(T::zero(), |acc, (&s, r)| acc + T::from_i64(s as i64) * r.clone())
    };
    match cfg.special {
        Special::None => {
            let mut h = T::from_i64(cfg.big_a as i64 - cfg.a_max() as i64 - 1) * p_a
                + T::from_i64(cfg.big_b as i64 - cfg.b_max() as i64 - 1) * p_b;
            for i in 0..cfg.m() {
                h = h + T::from_i64(cfg.a[i] as i64) * q[i].clone() + T::from_i64(cfg.b[i] as i64) * q_prime[i].clone()
                    - min_of(&q[i], &q_prime[i]);
            }
            h
        }
        Special::TauV => T::from_i64(cfg.big_a as i64 - cfg.a_max() as i64 - 2) * p_a + weighted(&cfg.a, &q),
        Special::SigmaV => T::from_i64(cfg.big_b as i64 - cfg.b_max() as i64 - 2) * p_b + weighted(&cfg.b, &q_prime),
    }
}

fn remainders<T: Scalar>(cfg: &Configuration, p: &FlipParams<T>) -> (Vec<T>, Vec<T>) {
    let p_a = p.get(cfg.big_a);
    let p_b = p.get(cfg.big_b);
    let (a_max, i_max, b_max, j_max) = (cfg.a_max(), cfg.i_max(), cfg.b_max(), cfg.j_max());
    let q = (0..cfg.m())
        .map(|i| if a_max > 0 && i == i_max { p.get(cfg.a[i]) - p_a.clone() } else { p.get(cfg.a[i]) })
        .collect();
    let q_prime = (0..cfg.m())
        .map(|i| if b_max > 0 && i == j_max { p.get(cfg.b[i]) - p_b.clone() } else { p.get(cfg.b[i]) })
        .collect();
    (q, q_prime)
}

/// The coarser bound `(A − 2)p_A + (B − 2)p_B + Σ (a_i p_{a_i} + b_i p_{b_i} − min(p_{a_i}, p_{b_i}))`.
pub fn h_crude_bound<T: Scalar>(cfg: &Configuration, p: &FlipParams<T>) -> T {
    let mut h =
        T::from_i64(cfg.big_a as i64 - 2) * p.get(cfg.big_a) + T::from_i64(cfg.big_b as i64 - 2) * p.get(cfg.big_b);
    for i in 0..cfg.m() {
        h = h + pair_bound(cfg.a[i], cfg.b[i], p);
    }
    h
}

/// `a p_a + b p_b − min(p_a, p_b)`.
pub fn pair_bound<T: Scalar>(a: usize, b: usize, p: &FlipParams<T>) -> T {
    let (pa, pb) = (p.get(a), p.get(b));
    T::from_i64(a as i64) * pa.clone() + T::from_i64(b as i64) * pb.clone() - min_of(&pa, &pb)
}

fn nonzero_vectors(len: usize, n_max: usize) -> Vec<Vec<usize>> {
    let base = n_max + 1;
    let total = base.pow(len as u32);
    (1..total)
        .map(|mut index| {
            let mut v = vec![0; len];
            for slot in v.iter_mut() {
                *slot = index % base;
                index /= base;
            }
            v
        })
        .collect()
}

/// Non-special templates `(A, B; a, b)` of size `m` with entries in
/// `0..=n_max`, `(a, b)` not identically zero, `A = 1 + Σa` and `B = 1 + Σb`.
pub fn templates_of_size(m: usize, n_max: usize) -> Vec<Configuration> {
    nonzero_vectors(2 * m, n_max)
        .into_iter()
        .map(|v| Configuration::template(v[..m].to_vec(), v[m..].to_vec()))
        .collect()
}

/// Templates `b_1 ≤ … ≤ b_m ≤ n_max` with `b_m > 0` for the `c = σ(v)`
/// constraints, returned as `SigmaV` configurations with `B = Σb`.
pub fn sigma_v_templates(m: usize, n_max: usize) -> Vec<Configuration> {
    fn extend(prefix: &mut Vec<usize>, m: usize, n_max: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == m {
            if prefix.last().is_some_and(|&b| b > 0) {
                out.push(prefix.clone());
            }
            return;
        }
        let start = prefix.last().copied().unwrap_or(0);
        for b in start..=n_max {
            prefix.push(b);
            extend(prefix, m, n_max, out);
            prefix.pop();
        }
    }
    let mut vectors = Vec::new();
    extend(&mut Vec::new(), m, n_max, &mut vectors);
    vectors
        .into_iter()
        .map(|b| {
            let big_b = b.iter().sum();
            Configuration { color: 0, special: Special::SigmaV, big_a: 0, big_b, a: vec![0; m], b }
        })
        .collect()
}

/// All configuration templates indexed by the truncated program: the
/// non-special templates for `1 ≤ m < m_star` followed by the `c = σ(v)`
/// templates for `2 ≤ m < m_star`.
pub fn enumerate_realizable(m_star: usize, n_max: usize) -> Vec<Configuration> {
    let mut out = Vec::new();
    for m in 1..m_star {
        out.extend(templates_of_size(m, n_max));
    }
    for m in 2..m_star {
        out.extend(sigma_v_templates(m, n_max));
    }
    out
}

/// A linear expression `Σ coeff·var + constant` with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    /// Variable coefficients, keyed by variable index.
    pub terms: BTreeMap<usize, Rational>,
    /// Constant term.
    pub constant: Rational,
}

impl LinExpr {
    /// The zero expression.
    pub fn zero() -> Self {
        Self::default()
    }

    /// A constant.
    pub fn constant(value: Rational) -> Self {
        Self { terms: BTreeMap::new(), constant: value }
    }

    /// A single variable.
    pub fn var(index: usize) -> Self {
        let mut e = Self::zero();
        e.add_term(index, rat(1));
        e
    }

    /// Adds `coeff·var`.
    pub fn add_term(&mut self, index: usize, coeff: Rational) {
        let entry = self.terms.entry(index).or_insert_with(|| rat(0));
        *entry += coeff;
        if num_traits::Zero::is_zero(entry) {
            self.terms.remove(&index);
        }
    }

    /// Adds `scale·other`.
    pub fn add_scaled(&mut self, other: &LinExpr, scale: &Rational) {
        for (&index, coeff) in &other.terms {
            self.add_term(index, coeff * scale);
        }
        self.constant += &other.constant * scale;
    }

    /// `scale·self`.
    pub fn scaled(&self, scale: &Rational) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, scale);
        out
    }

    /// Evaluates at an assignment indexed by variable.
    pub fn eval<T: Scalar>(&self, values: &[T]) -> T {
        self.terms
            .iter()
            .fold(T::from_rational(&self.constant), |acc, (&i, c)| acc + T::from_rational(c) * values[i].clone())
    }
}

/// A configuration constraint before linearization: `base − Σ min(l_i, r_i)`.
struct MinForm {
    base: LinExpr,
    mins: Vec<(LinExpr, LinExpr)>,
}

impl MinForm {
    /// One expression per branch choice; the constraint `form ≤ rhs` holds
    /// iff every branch satisfies it.
    fn branches(&self) -> Vec<LinExpr> {
        let mut out = vec![self.base.clone()];
        let minus = rat(-1);
        for (left, right) in &self.mins {
            if left == right {
                for e in out.iter_mut() {
                    e.add_scaled(left, &minus);
                }
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * 2);
            for e in &out {
                for side in [left, right] {
                    let mut branch = e.clone();
                    branch.add_scaled(side, &minus);
                    next.push(branch);
                }
            }
            out = next;
        }
        out
    }
}

/// Symbolic `H` in terms of the `p` variables, mirroring [`h_value`].
fn h_form(cfg: &Configuration, pvar: &dyn Fn(usize) -> LinExpr) -> MinForm {
    let p_a = pvar(cfg.big_a);
    let p_b = pvar(cfg.big_b);
    let (a_max, i_max, b_max, j_max) = (cfg.a_max(), cfg.i_max(), cfg.b_max(), cfg.j_max());
    let minus = rat(-1);
    let q: Vec<LinExpr> = (0..cfg.m())
        .map(|i| {
            let mut e = pvar(cfg.a[i]);
            if a_max > 0 && i == i_max {
                e.add_scaled(&p_a, &minus);
            }
            e
        })
        .collect();
    let q_prime: Vec<LinExpr> = (0..cfg.m())
        .map(|i| {
            let mut e = pvar(cfg.b[i]);
            if b_max > 0 && i == j_max {
                e.add_scaled(&p_b, &minus);
            }
            e
        })
        .collect();
    let mut base = LinExpr::zero();
    let mut mins = Vec::new();
    match cfg.special {
        Special::None => {
            base.add_scaled(&p_a, &rat(cfg.big_a as i64 - a_max as i64 - 1));
            base.add_scaled(&p_b, &rat(cfg.big_b as i64 - b_max as i64 - 1));
            for i in 0..cfg.m() {
                base.add_scaled(&q[i], &rat(cfg.a[i] as i64));
                base.add_scaled(&q_prime[i], &rat(cfg.b[i] as i64));
                mins.push((q[i].clone(), q_prime[i].clone()));
            }
        }
        Special::TauV => {
            base.add_scaled(&p_a, &rat(cfg.big_a as i64 - a_max as i64 - 2));
            for (qi, &ai) in q.iter().zip(&cfg.a) {
                base.add_scaled(qi, &rat(ai as i64));
            }
        }
        Special::SigmaV => {
            base.add_scaled(&p_b, &rat(cfg.big_b as i64 - b_max as i64 - 2));
            for (qi, &bi) in q_prime.iter().zip(&cfg.b) {
                base.add_scaled(qi, &rat(bi as i64));
            }
        }
    }
    MinForm { base, mins }
}

/// Which family a constraint row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TagKind {
    /// `H(A, B; a, b) ≤ −1 + λm` for a configuration.
    Config,
    /// `(B − b_m)p_B + Σ_{i<m} b_i p_{b_i} ≤ −1 + λm` for `c = σ(v)`.
    SigmaV,
    /// `α p_α ≤ 1`.
    Pap,
    /// The dummy-variable rows bounding large configurations.
    Approx,
    /// `p_α ≤ p_{α−1}`.
    Mono,
    /// The rows tying `λ` to the per-class objectives.
    Link,
}

impl TagKind {
    fn prefix(self) -> &'static str {
        match self {
            TagKind::Config => "cfg",
            TagKind::SigmaV => "sigma_v",
            TagKind::Pap => "pap",
            TagKind::Approx => "approx",
            TagKind::Mono => "mono",
            TagKind::Link => "link",
        }
    }
}

/// Identifies the source of a constraint row.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tag {
    /// Constraint family.
    pub kind: TagKind,
    /// Instance within the family, e.g. a configuration's canonical text.
    pub label: String,
}

impl Tag {
    fn new(kind: TagKind, label: impl Into<String>) -> Self {
        Self { kind, label: label.into() }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.prefix(), self.label)
    }
}

/// A decision variable with bounds `0 ≤ z ≤ upper`, or pinned to a value.
#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    /// Display name, e.g. `p2` or `lambda`.
    pub name: String,
    /// Upper bound.
    pub upper: Rational,
    /// Fixed value, if the variable is pinned.
    pub fixed: Option<Rational>,
}

/// A row `Σ coeff·var ≤ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    /// Left-hand side coefficients.
    pub coeffs: BTreeMap<usize, Rational>,
    /// Right-hand side.
    pub rhs: Rational,
    /// Source of the row. Several rows share a tag when a `min` term was
    /// linearized.
    pub tag: Tag,
}

impl Constraint {
    /// Left-hand side at an assignment.
    pub fn lhs<T: Scalar>(&self, values: &[T]) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, (&i, c)| acc + T::from_rational(c) * values[i].clone())
    }

    /// `rhs − lhs`; negative when violated.
    pub fn slack<T: Scalar>(&self, values: &[T]) -> T {
        T::from_rational(&self.rhs) - self.lhs(values)
    }
}

/// The programs of the family.
#[derive(Clone, Debug, PartialEq)]
pub enum LpKind {
    /// Monotonicity, configuration rows for `m < m*` and the `σ(v)` rows.
    Lp1Restricted,
    /// The truncated program with the `α p_α ≤ 1` rows and the dummy rows
    /// for `m ≥ m*`.
    Lp2,
    /// The two-constraint program on `(3,2;(2),(1))` and `(7,3;(3,3),(1,1))`.
    Lp3,
    /// The program with `p_3 = 1/6` and the two extremal shapes removed.
    Lp4,
    /// The mixed program with per-class objectives and weight `γ`.
    Lp5 {
        /// The ratio weighting `λ_bad` against `λ_good`.
        gamma: Rational,
    },
}

impl LpKind {
    /// Short name.
    pub fn name(&self) -> &'static str {
        match self {
            LpKind::Lp1Restricted => "lp1",
            LpKind::Lp2 => "lp2",
            LpKind::Lp3 => "lp3",
            LpKind::Lp4 => "lp4",
            LpKind::Lp5 { .. } => "lp5",
        }
    }
}

impl FromStr for LpKind {
    type Err = Error;

    /// Accepts `lp1`, `lp2`, `lp3`, `lp4`, `lp5` (with the default `γ`) and
    /// `lp5:<gamma>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "lp1" | "lp1_restricted" => Ok(LpKind::Lp1Restricted),
            "lp2" => Ok(LpKind::Lp2),
            "lp3" => Ok(LpKind::Lp3),
            "lp4" => Ok(LpKind::Lp4),
            "lp5" | "lp5_mixed" => Ok(LpKind::Lp5 { gamma: default_gamma() }),
            other => match other.strip_prefix("lp5:") {
                Some(g) => parse_rational(g)
                    .map(|gamma| LpKind::Lp5 { gamma })
                    .ok_or_else(|| Error::InvalidArgument(format!("unreadable gamma `{g}`"))),
                None => Err(Error::InvalidArgument(format!("unknown program `{s}`"))),
            },
        }
    }
}

/// The default mixing weight `γ = 25.597784`.
pub fn default_gamma() -> Rational {
    parse_rational("25.597784").expect("literal")
}

/// The optimum `161/88` of the program with `p_3 = 1/6`.
pub fn lambda_hat() -> Rational {
    rat_ratio(161, 88)
}

/// A program `minimize z_objective` subject to rows `Σ coeff·z ≤ rhs` and
/// `0 ≤ z ≤ upper`. Equalities are expressed by pinning variables.
#[derive(Clone, Debug)]
pub struct LpInstance {
    /// Which program this is.
    pub kind: LpKind,
    /// `N_max`.
    pub n_max: usize,
    /// `m*`.
    pub m_star: usize,
    /// Declared variables.
    pub variables: Vec<Variable>,
    /// Constraint rows.
    pub constraints: Vec<Constraint>,
    /// Index of the minimized variable.
    pub objective: usize,
}

impl LpInstance {
    fn new(kind: LpKind, n_max: usize, m_star: usize) -> Self {
        Self { kind, n_max, m_star, variables: Vec::new(), constraints: Vec::new(), objective: 0 }
    }

    fn declare(&mut self, name: &str, upper: Rational, fixed: Option<Rational>) -> usize {
        self.variables.push(Variable { name: name.to_string(), upper, fixed });
        self.variables.len() - 1
    }

    /// Index of a variable by name.
    pub fn variable(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Index of `p_α`, if declared.
    pub fn p_variable(&self, alpha: usize) -> Option<usize> {
        self.variable(&format!("p{alpha}"))
    }

    /// Adds `expr ≤ 0`, moving the constant to the right-hand side.
    fn push_le_zero(&mut self, expr: LinExpr, tag: Tag) {
        self.constraints.push(Constraint { coeffs: expr.terms, rhs: -expr.constant, tag });
    }

    /// Number of constraint rows.
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    /// `true` when there are no rows.
    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Number of distinct tags among the rows.
    pub fn tag_count(&self) -> usize {
        self.constraints.iter().map(|c| &c.tag).collect::<HashSet<_>>().len()
    }

    /// Renders the program in CPLEX LP text format, with each row's tag as a
    /// trailing comment.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        let num = |r: &Rational| {
            if r.is_integer() {
                r.to_integer().to_string()
            } else {
                format!("{:.15}", Scalar::to_f64(r))
            }
        };
        out.push_str(&format!("\\ program {} (N_max = {}, m* = {})\n", self.kind.name(), self.n_max, self.m_star));
        out.push_str(&format!("Minimize\n obj: {}\nSubject To\n", self.variables[self.objective].name));
        for (i, row) in self.constraints.iter().enumerate() {
            let mut line = format!(" r{}:", i + 1);
            if row.coeffs.is_empty() {
                line.push_str(" 0 ");
                line.push_str(&self.variables[0].name);
            }
            for (&v, c) in &row.coeffs {
                let sign = if num_traits::Signed::is_negative(c) { '-' } else { '+' };
                line.push_str(&format!(" {sign} {} {}", num(&num_traits::Signed::abs(c)), self.variables[v].name));
            }
            line.push_str(&format!(" <= {} \\ {}\n", num(&row.rhs), row.tag));
            out.push_str(&line);
        }
        out.push_str("Bounds\n");
        for var in &self.variables {
            match &var.fixed {
                Some(value) => out.push_str(&format!(" {} = {}\n", var.name, num(value))),
                None => out.push_str(&format!(" 0 <= {} <= {}\n", var.name, num(&var.upper))),
            }
        }
        out.push_str("End\n");
        out
    }

    /// Returns a copy with the `p` variables pinned to `p`. Fails if `p`
    /// disagrees with a value the program already pins, or is non-zero
    /// beyond the program's `N_max`.
    pub fn with_fixed_params(&self, p: &FlipParams<Rational>) -> Result<LpInstance> {
        for alpha in self.n_max + 1..=p.n_max() {
            if !num_traits::Zero::is_zero(&p.get(alpha)) {
                return Err(Error::InvalidArgument(format!("p_{alpha} is non-zero beyond N_max = {}", self.n_max)));
            }
        }
        let mut out = self.clone();
        for alpha in 1..=self.n_max {
            if let Some(index) = out.p_variable(alpha) {
                let value = p.get(alpha);
                let var = &mut out.variables[index];
                if let Some(existing) = &var.fixed {
                    if *existing != value {
                        return Err(Error::InvalidArgument(format!(
                            "program pins p_{alpha} = {existing}, got {value}"
                        )));
                    }
                }
                var.fixed = Some(value);
            }
        }
        Ok(out)
    }
}

fn p_vars(lp: &mut LpInstance, n_max: usize, pinned: &[(usize, Rational)]) -> Vec<usize> {
    (1..=n_max)
        .map(|alpha| {
            let fixed = if alpha == 1 {
                Some(rat(1))
            } else {
                pinned.iter().find(|(a, _)| *a == alpha).map(|(_, v)| v.clone())
            };
            lp.declare(&format!("p{alpha}"), rat(1), fixed)
        })
        .collect()
}

fn push_monotonicity(lp: &mut LpInstance, p: &[usize]) {
    for alpha in 2..=p.len() {
        let mut e = LinExpr::var(p[alpha - 1]);
        e.add_term(p[alpha - 2], rat(-1));
        lp.push_le_zero(e, Tag::new(TagKind::Mono, format!("{alpha}")));
    }
}

/// `form(cfg) − m·λ + 1 ≤ 0`, one row per branch.
fn push_config_rows(lp: &mut LpInstance, cfg: &Configuration, p: &[usize], lambda: usize, kind: TagKind) {
    let pvar = |alpha: usize| {
        if alpha == 0 || alpha > p.len() {
            LinExpr::zero()
        } else {
            LinExpr::var(p[alpha - 1])
        }
    };
    let form = if kind == TagKind::SigmaV { sigma_v_form(cfg, &pvar) } else { h_form(cfg, &pvar) };
    let label = if kind == TagKind::SigmaV {
        format!("[{}]", cfg.b.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
    } else {
        cfg.canonical()
    };
    for mut branch in form.branches() {
        branch.add_term(lambda, rat(-(cfg.m() as i64)));
        branch.constant += rat(1);
        lp.push_le_zero(branch, Tag::new(kind, label.clone()));
    }
}

/// `(B − b_m)p_B + Σ_{i<m} b_i p_{b_i}` for sorted `b`.
fn sigma_v_form(cfg: &Configuration, pvar: &dyn Fn(usize) -> LinExpr) -> MinForm {
    let m = cfg.m();
    let mut base = LinExpr::zero();
    base.add_scaled(&pvar(cfg.big_b), &rat(cfg.big_b as i64 - cfg.b[m - 1] as i64));
    for &b in &cfg.b[..m - 1] {
        base.add_scaled(&pvar(b), &rat(b as i64));
    }
    MinForm { base, mins: Vec::new() }
}

fn push_pap(lp: &mut LpInstance, p: &[usize]) {
    for alpha in 1..=p.len() {
        let mut e = LinExpr::var(p[alpha - 1]).scaled(&rat(alpha as i64));
        e.constant = rat(-1);
        lp.push_le_zero(e, Tag::new(TagKind::Pap, format!("{alpha}")));
    }
}

/// The rows `x ≥ (A − 2)p_A`, `y ≥ a p_a + b p_b − min(p_a, p_b)` and
/// `−1 + λ m* ≥ 2x + m* y`.
fn push_approx(lp: &mut LpInstance, p: &[usize], lambda: usize, x: usize, y: usize) {
    let n_max = p.len();
    let m_star = lp.m_star as i64;
    let pvar = |alpha: usize| if alpha == 0 || alpha > n_max { LinExpr::zero() } else { LinExpr::var(p[alpha - 1]) };
    for big_a in 0..=n_max + 1 {
        let mut e = pvar(big_a).scaled(&rat(big_a as i64 - 2));
        e.add_term(x, rat(-1));
        lp.push_le_zero(e, Tag::new(TagKind::Approx, format!("x:{big_a}")));
    }
    for a in 0..=n_max {
        for b in a + 1..=n_max {
            let form = MinForm {
                base: {
                    let mut e = pvar(a).scaled(&rat(a as i64));
                    e.add_scaled(&pvar(b), &rat(b as i64));
                    e
                },
                mins: vec![(pvar(a), pvar(b))],
            };
            for mut branch in form.branches() {
                branch.add_term(y, rat(-1));
                lp.push_le_zero(branch, Tag::new(TagKind::Approx, format!("y:{a},{b}")));
            }
        }
    }
    let mut e = LinExpr::var(x).scaled(&rat(2));
    e.add_term(y, rat(m_star));
    e.add_term(lambda, rat(-m_star));
    e.constant = rat(1);
    lp.push_le_zero(e, Tag::new(TagKind::Approx, "lambda"));
}

/// Builds a program of the family.
///
/// `n_max` and `m_star` parametrize the first, second and fifth programs.
/// The third and fourth are fixed finite programs on `p_1..p_6` (so
/// `p_7 = 0`) and ignore both arguments.
pub fn build_lp(kind: LpKind, n_max: usize, m_star: usize) -> Result<LpInstance> {
    if n_max == 0 {
        return Err(Error::InvalidParams("N_max must be at least 1".into()));
    }
    if m_star < 2 {
        return Err(Error::InvalidParams("m* must be at least 2".into()));
    }
    let lambda_upper = rat(10);
    match kind {
        LpKind::Lp3 => {
            let mut lp = LpInstance::new(kind, 6, 2);
            let p = p_vars(&mut lp, 6, &[]);
            let lambda = lp.declare("lambda", lambda_upper, None);
            lp.objective = lambda;
            push_monotonicity(&mut lp, &p);
            for cfg in [Configuration::template(vec![2], vec![1]), Configuration::template(vec![3, 3], vec![1, 1])] {
                push_config_rows(&mut lp, &cfg, &p, lambda, TagKind::Config);
            }
            Ok(lp)
        }
        LpKind::Lp4 => {
            let mut lp = LpInstance::new(kind, 6, 3);
            let p = p_vars(&mut lp, 6, &[(3, rat_ratio(1, 6))]);
            let lambda = lp.declare("lambda", lambda_upper, None);
            lp.objective = lambda;
            push_monotonicity(&mut lp, &p);
            for i in 1..=6 {
                for j in 2..=6 {
                    if (i, j) != (1, 2) {
                        let cfg = Configuration::template(vec![i], vec![j]);
                        push_config_rows(&mut lp, &cfg, &p, lambda, TagKind::Config);
                    }
                }
            }
            let cfg = Configuration::template(vec![2, 2], vec![1, 1]);
            push_config_rows(&mut lp, &cfg, &p, lambda, TagKind::Config);
            Ok(lp)
        }
        LpKind::Lp1Restricted | LpKind::Lp2 | LpKind::Lp5 { .. } => {
            let mut lp = LpInstance::new(kind.clone(), n_max, m_star);
            let p = p_vars(&mut lp, n_max, &[]);
            let lambda = lp.declare("lambda", lambda_upper.clone(), None);
            lp.objective = lambda;
            let classes = if let LpKind::Lp5 { gamma } = &kind {
                let sing = lp.declare("lambda_sing", lambda_upper.clone(), None);
                let bad = lp.declare("lambda_bad", lambda_upper.clone(), None);
                let good = lp.declare("lambda_good", lambda_upper.clone(), None);
                Some((sing, bad, good, gamma.clone()))
            } else {
                None
            };
            let dummies = if matches!(kind, LpKind::Lp1Restricted) {
                None
            } else {
                let x = lp.declare("x", lambda_upper.clone(), None);
                let y = lp.declare("y", lambda_upper.clone(), None);
                Some((x, y))
            };
            push_monotonicity(&mut lp, &p);
            let good = classes.as_ref().map_or(lambda, |c| c.2);
            for cfg in enumerate_realizable(m_star, n_max) {
                if cfg.special == Special::SigmaV {
                    push_config_rows(&mut lp, &cfg, &p, good, TagKind::SigmaV);
                    continue;
                }
                let target = match &classes {
                    None => lambda,
                    Some((sing, bad, good, _)) => {
                        if cfg.m() == 1 {
                            *sing
                        } else if cfg.is_bad_shape() {
                            *bad
                        } else {
                            *good
                        }
                    }
                };
                push_config_rows(&mut lp, &cfg, &p, target, TagKind::Config);
            }
            if let Some((x, y)) = dummies {
                push_pap(&mut lp, &p);
                push_approx(&mut lp, &p, good, x, y);
            }
            if let Some((sing, bad, good, gamma)) = classes {
                let one = rat(1);
                let total = &gamma + &one;
                for (index, class) in [sing, good].into_iter().enumerate() {
                    let mut e = LinExpr::var(class);
                    e.add_term(lambda, rat(-1));
                    lp.push_le_zero(e, Tag::new(TagKind::Link, if index == 0 { "sing" } else { "good" }));
                }
                let mut e = LinExpr::var(bad).scaled(&(&gamma / &total));
                e.add_term(good, &one / &total);
                e.add_term(lambda, rat(-1));
                lp.push_le_zero(e, Tag::new(TagKind::Link, "mixed"));
            }
            Ok(lp)
        }
    }
}

/// Termination status of [`solve_lp`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    /// An optimal vertex was found.
    Optimal,
    /// No assignment satisfies the rows.
    Infeasible,
    /// The objective is unbounded below.
    Unbounded,
}

/// Result of [`solve_lp`].
#[derive(Clone, Debug)]
pub struct SolveResult<T> {
    /// Termination status.
    pub status: LpStatus,
    /// Optimal objective.
    pub objective: T,
    /// Optimal value of every declared variable, pinned ones included.
    pub assignment: Vec<T>,
    /// `|primal objective − dual objective|` at the reported point.
    pub duality_gap: T,
    /// Largest row violation of the reported assignment.
    pub max_violation: T,
    /// Tags of the rows that are tight at the optimum.
    pub tight: Vec<Tag>,
}

impl<T: Scalar> SolveResult<T> {
    /// Value of the named variable.
    pub fn value(&self, lp: &LpInstance, name: &str) -> Option<T> {
        lp.variable(name).map(|i| self.assignment[i].clone())
    }

    /// The `p` values of the optimum as flip parameters.
    pub fn flip_params(&self, lp: &LpInstance) -> Result<FlipParams<T>> {
        let tail = (1..=lp.n_max).filter_map(|a| lp.p_variable(a)).map(|i| self.assignment[i].clone()).collect();
        FlipParams::new(tail)
    }
}

/// Tolerance used for feasibility and tightness in floating point.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

fn tolerance<T: Scalar>() -> T {
    if T::tolerance().is_zero() {
        T::zero()
    } else {
        T::from_rational(&parse_rational("0.000000001").expect("literal"))
    }
}

/// Solves the program. With `T = f64` the tolerance is `1e−9`; with
/// `T = Rational` the arithmetic is exact.
pub fn solve_lp<T: Scalar>(lp: &LpInstance) -> SolveResult<T> {
    let free: Vec<usize> = (0..lp.variables.len()).filter(|&i| lp.variables[i].fixed.is_none()).collect();
    let mut column = vec![usize::MAX; lp.variables.len()];
    for (col, &var) in free.iter().enumerate() {
        column[var] = col;
    }
    let width = free.len();

    let failure = |status: LpStatus| SolveResult {
        status,
        objective: T::zero(),
        assignment: vec![T::zero(); lp.variables.len()],
        duality_gap: T::zero(),
        max_violation: T::zero(),
        tight: Vec::new(),
    };

    // Substitute pinned variables, drop rows without free variables and
    // deduplicate identical rows.
    let mut seen: HashSet<(Vec<(usize, Rational)>, Rational)> = HashSet::new();
    let mut g: Vec<Vec<T>> = Vec::new();
    let mut h: Vec<T> = Vec::new();
    for row in &lp.constraints {
        let mut rhs = row.rhs.clone();
        let mut sparse = Vec::new();
        for (&var, coeff) in &row.coeffs {
            match &lp.variables[var].fixed {
                Some(value) => rhs -= coeff * value,
                None => sparse.push((column[var], coeff.clone())),
            }
        }
        if sparse.is_empty() {
            if T::from_rational(&rhs) < -tolerance::<T>() {
                return failure(LpStatus::Infeasible);
            }
            continue;
        }
        if !seen.insert((sparse.clone(), rhs.clone())) {
            continue;
        }
        let mut dense = vec![T::zero(); width];
        for (col, coeff) in sparse {
            dense[col] = T::from_rational(&coeff);
        }
        g.push(dense);
        h.push(T::from_rational(&rhs));
    }
    for (col, &var) in free.iter().enumerate() {
        let mut dense = vec![T::zero(); width];
        dense[col] = T::one();
        g.push(dense);
        h.push(T::from_rational(&lp.variables[var].upper));
    }

    // Dual: maximize −h·w subject to −Gᵀw ≤ c, w ≥ 0.
    let mut cost = vec![T::zero(); width];
    if column[lp.objective] != usize::MAX {
        cost[column[lp.objective]] = T::one();
    }
    let rows = g.len();
    let dual_a: Vec<Vec<T>> = (0..width).map(|j| (0..rows).map(|i| -g[i][j].clone()).collect()).collect();
    let dual_c: Vec<T> = h.iter().map(|x| -x.clone()).collect();
    let solution = maximize(&dual_a, &cost, &dual_c);
    match solution.status {
        SimplexStatus::Optimal => {}
        SimplexStatus::Unbounded => return failure(LpStatus::Infeasible),
        SimplexStatus::Infeasible => return failure(LpStatus::Unbounded),
    }

    let mut assignment = vec![T::zero(); lp.variables.len()];
    for (i, var) in lp.variables.iter().enumerate() {
        assignment[i] = match &var.fixed {
            Some(value) => T::from_rational(value),
            None => solution.duals[column[i]].clone(),
        };
    }
    let objective = assignment[lp.objective].clone();
    let duality_gap = (objective.clone() - solution.value.clone()).abs();
    let report = check_feasible(lp, &assignment, tolerance::<T>());
    let status = if report.violations.is_empty() { LpStatus::Optimal } else { LpStatus::Infeasible };
    let tight = tight_constraints(lp, &assignment, tolerance::<T>());
    SolveResult { status, objective, assignment, duality_gap, max_violation: report.max_violation, tight }
}

/// Per-row slacks of an assignment.
#[derive(Clone, Debug)]
pub struct FeasibilityReport<T> {
    /// `rhs − lhs` for every row, in row order.
    pub slacks: Vec<T>,
    /// Indices of rows violated by more than the tolerance.
    pub violations: Vec<usize>,
    /// Largest violation (zero when feasible).
    pub max_violation: T,
}

impl<T: Scalar> FeasibilityReport<T> {
    /// `true` when no row is violated.
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates every row at `assignment` (indexed by variable). Variable
/// bounds and pinned values are checked too and reported as violations
/// with index `len()` and beyond.
pub fn check_feasible<T: Scalar>(lp: &LpInstance, assignment: &[T], tol: T) -> FeasibilityReport<T> {
    let slacks: Vec<T> = lp.constraints.iter().map(|row| row.slack(assignment)).collect();
    let mut violations = Vec::new();
    let mut max_violation = T::zero();
    for (i, s) in slacks.iter().enumerate() {
        if *s < -tol.clone() {
            violations.push(i);
        }
        max_violation = max_of(&max_violation, &-s.clone());
    }
    for (i, var) in lp.variables.iter().enumerate() {
        let value = &assignment[i];
        let excess = match &var.fixed {
            Some(fixed) => (value.clone() - T::from_rational(fixed)).abs(),
            None => max_of(&-value.clone(), &(value.clone() - T::from_rational(&var.upper))),
        };
        if excess > tol {
            violations.push(lp.constraints.len() + i);
        }
        max_violation = max_of(&max_violation, &excess);
    }
    FeasibilityReport { slacks, violations, max_violation }
}

/// Tags whose tightest row has `|rhs − lhs| ≤ tol`. For a configuration
/// this means `H = −1 + λm` exactly, since `H` is the largest of its
/// branch rows.
pub fn tight_constraints<T: Scalar>(lp: &LpInstance, assignment: &[T], tol: T) -> Vec<Tag> {
    let mut least: BTreeMap<&Tag, T> = BTreeMap::new();
    for row in &lp.constraints {
        let slack = row.slack(assignment);
        least.entry(&row.tag).and_modify(|s| *s = min_of(s, &slack)).or_insert(slack);
    }
    least.into_iter().filter(|(_, s)| s.abs() <= tol).map(|(tag, _)| tag.clone()).collect()
}

/// Pins the `p` variables to `p` and minimizes over the remaining ones
/// (`λ`'s and dummies). This gives the smallest objective at which `p`
/// is feasible, together with a witnessing assignment.
pub fn complete_assignment<T: Scalar>(lp: &LpInstance, p: &FlipParams<Rational>) -> Result<SolveResult<T>> {
    Ok(solve_lp(&lp.with_fixed_params(p)?))
}

/// Outcome of one check in [`verify_dpp_feasibility`].
#[derive(Clone, Debug, Serialize)]
pub struct DppCase {
    /// Name of the case.
    pub name: String,
    /// Whether it passed.
    pub passed: bool,
    /// Number of inequalities checked.
    pub checked: usize,
    /// Violating configurations or inequalities, by label.
    pub violations: Vec<String>,
}

/// Report of [`verify_dpp_feasibility`].
#[derive(Clone, Debug, Serialize)]
pub struct DppReport {
    /// All cases passed.
    pub passed: bool,
    /// Size-two configurations attaining `H = −1 + 2λ̂` exactly.
    pub m2_equalities: Vec<String>,
    /// Size-one configurations attaining `H = −1 + λ̂` exactly.
    pub m1_equalities: Vec<String>,
    /// Individual cases.
    pub cases: Vec<DppCase>,
}

/// Checks that `p̂` is feasible at `λ̂ = 161/88` for the program whose rows
/// are `H ≤ −1 + λ̂m` over every realizable configuration except the four
/// extremal shapes, with `p_3 = 1/6` and `p_α = 0` for `α ≥ 7`.
///
/// Sizes one and two are enumerated exhaustively with entries up to six
/// (larger entries have `p = 0`). Size three uses the crude bound with
/// `a p_a + b p_b − min(p_a, p_b) ≤ 4/3` and `(A − 2)p_A ≤ (3λ̂ − 5)/2`.
/// Larger sizes follow from `λ̂ ≥ 4/3`. The colors `σ(v)` and `τ(v)` are
/// covered by `α p_α ≤ 1`, `(α − 1)p_α ≤ 1/3` and the size-two `σ(v)` rows.
pub fn verify_dpp_feasibility(p_hat: &FlipParams<Rational>) -> DppReport {
    let lambda = lambda_hat();
    let one = rat(1);
    let mut cases = Vec::new();
    let mut case = |name: &str, checked: usize, violations: Vec<String>| {
        cases.push(DppCase { name: name.to_string(), passed: violations.is_empty(), checked, violations });
    };

    let mut pre = Vec::new();
    if p_hat.get(3) != rat_ratio(1, 6) {
        pre.push(format!("p3 = {}", p_hat.get(3)));
    }
    for alpha in 7..=p_hat.n_max() {
        if !num_traits::Zero::is_zero(&p_hat.get(alpha)) {
            pre.push(format!("p{alpha} = {}", p_hat.get(alpha)));
        }
    }
    case("preconditions", 2, pre);

    let mut helper = Vec::new();
    let half_gap = (rat(3) * &lambda - rat(5)) / rat(2);
    for alpha in 1..=6i64 {
        let p = p_hat.get(alpha as usize);
        if rat(alpha) * &p > one {
            helper.push(format!("{alpha} p{alpha} <= 1"));
        }
        if rat(alpha - 1) * &p > rat_ratio(1, 3) {
            helper.push(format!("{} p{alpha} <= 1/3", alpha - 1));
        }
        if rat(alpha - 2) * &p > half_gap {
            helper.push(format!("{} p{alpha} <= (3 lambda - 5)/2", alpha - 2));
        }
    }
    case("helper inequalities", 18, helper);

    let exhaustive = |m: usize, equalities: &mut Vec<String>| {
        let bound = rat(m as i64) * &lambda - &one;
        let mut violations = Vec::new();
        let mut checked = 0;
        for cfg in templates_of_size(m, 6) {
            if crate::config::is_extremal(&cfg) {
                continue;
            }
            checked += 1;
            let h = h_value(&cfg, p_hat);
            if h > bound {
                violations.push(cfg.canonical());
            } else if h == bound {
                equalities.push(cfg.canonical());
            }
        }
        (checked, violations)
    };
    let mut m1_equalities = Vec::new();
    let mut m2_equalities = Vec::new();
    let (checked, violations) = exhaustive(1, &mut m1_equalities);
    case("size 1", checked, violations);
    let (checked, violations) = exhaustive(2, &mut m2_equalities);
    case("size 2", checked, violations);

    let mut size3 = Vec::new();
    let mut checked = 0;
    for a in 0..=7 {
        for b in 0..=7 {
            checked += 1;
            if pair_bound(a, b, p_hat) > rat_ratio(4, 3) {
                size3.push(format!("g({a},{b}) <= 4/3"));
            }
        }
    }
    for big_a in 0..=7i64 {
        checked += 1;
        if rat(big_a - 2) * p_hat.get(big_a as usize) > half_gap {
            size3.push(format!("({big_a} - 2) p{big_a} <= (3 lambda - 5)/2"));
        }
    }
    case("size 3", checked, size3);

    let large = if lambda >= rat_ratio(4, 3) { Vec::new() } else { vec!["lambda >= 4/3".to_string()] };
    case("size 4 and above", 1, large);

    let mut special = Vec::new();
    let bound2 = rat(2) * &lambda - &one;
    let templates = sigma_v_templates(2, 6);
    for cfg in &templates {
        let value =
            rat((cfg.big_b - cfg.b[1]) as i64) * p_hat.get(cfg.big_b) + rat(cfg.b[0] as i64) * p_hat.get(cfg.b[0]);
        if value > bound2 {
            special.push(format!("sigma_v [{},{}]", cfg.b[0], cfg.b[1]));
        }
    }
    case("c in {sigma(v), tau(v)}", templates.len(), special);

    let passed = cases.iter().all(|c| c.passed) && !cases.is_empty();
    DppReport { passed, m2_equalities, m1_equalities, cases }
}
