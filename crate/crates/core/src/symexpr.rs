//! Exact symbolic scalars.
//!
//! A [`ScalarExpr`] is kept in canonical form at all times: a sum of terms,
//! each a rational coefficient times a product of atoms raised to nonzero
//! integer powers. Division by a single term is folded into negative powers;
//! division by a sum falls back to a `Recip` atom.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Draw a process-unique id. Id 0 is reserved for ordinary user symbols.
pub fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// A symbol: a printed name plus an identity. Two symbols with the same name
/// but different ids are different symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym {
    name: Arc<str>,
    id: u64,
}

impl Sym {
    pub fn new(name: &str) -> Self {
        Sym {
            name: Arc::from(name),
            id: 0,
        }
    }

    /// A symbol that cannot collide with any other symbol, whatever its name.
    pub fn fresh(name: &str) -> Self {
        Sym {
            name: Arc::from(name),
            id: fresh_id(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn id(&self) -> u64 {
        self.id
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Indivisible factor of a monomial. Variant order is the atom order used for
/// canonical sorting: symbols first, then function atoms by tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Symbol(Sym),
    Sin(ScalarExpr),
    Cos(ScalarExpr),
    Sqrt(ScalarExpr),
    Abs(ScalarExpr),
    /// `1 / p` for a sum `p` normalized to leading coefficient 1.
    Recip(ScalarExpr),
}

type Monomial = Vec<(Atom, i32)>;

/// Exact symbolic scalar in canonical sum-of-terms form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScalarExpr {
    terms: Vec<(Monomial, BigRational)>,
}

fn multiply_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let p = a[i].1 + b[j].1;
                if p != 0 {
                    out.push((a[i].0.clone(), p));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn rational_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) => n / d,
        _ => f64::NAN,
    }
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

impl ScalarExpr {
    fn from_map(map: BTreeMap<Monomial, BigRational>) -> Self {
        ScalarExpr {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    fn from_terms<I: IntoIterator<Item = (Monomial, BigRational)>>(terms: I) -> Self {
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert_with(BigRational::zero) += c;
        }
        Self::from_map(map)
    }

    fn from_atom(atom: Atom, power: i32) -> Self {
        ScalarExpr {
            terms: vec![(vec![(atom, power)], BigRational::one())],
        }
    }

    pub fn zero() -> Self {
        ScalarExpr { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(r: BigRational) -> Self {
        Self::from_terms([(Vec::new(), r)])
    }

    pub fn symbol(s: Sym) -> Self {
        Self::from_atom(Atom::Symbol(s), 1)
    }

    /// Shorthand for a plain user symbol.
    pub fn var(name: &str) -> Self {
        Self::symbol(Sym::new(name))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.as_slice() {
            [] => Some(BigRational::zero()),
            [(m, c)] if m.is_empty() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_rational()
            .filter(|r| r.is_integer())
            .and_then(|r| r.to_integer().to_i64())
    }

    /// The symbol, if this expression is exactly one symbol.
    pub fn as_symbol(&self) -> Option<&Sym> {
        match self.terms.as_slice() {
            [(m, c)] if c.is_one() => match m.as_slice() {
                [(Atom::Symbol(s), 1)] => Some(s),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c * k)))
    }

    pub fn reciprocal(&self) -> Result<Self> {
        match self.terms.as_slice() {
            [] => Err(Error::Arithmetic("division by zero".into())),
            [(m, c)] => {
                let mono = m.iter().map(|(a, p)| (a.clone(), -p)).collect();
                Ok(ScalarExpr {
                    terms: vec![(mono, c.recip())],
                })
            }
            [(_, lead), ..] => {
                let lead = lead.clone();
                let normalized = self.scale(&lead.recip());
                Ok(Self::from_atom(Atom::Recip(normalized), 1).scale(&lead.recip()))
            }
        }
    }

    pub fn checked_div(&self, other: &ScalarExpr) -> Result<Self> {
        Ok(self * &other.reciprocal()?)
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.reciprocal()?.pow(-n);
        }
        let mut base = self.clone();
        let mut acc = ScalarExpr::one();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    pub fn sin(arg: ScalarExpr) -> Self {
        if arg.is_zero() {
            return Self::zero();
        }
        Self::from_atom(Atom::Sin(arg), 1)
    }

    pub fn cos(arg: ScalarExpr) -> Self {
        if arg.is_zero() {
            return Self::one();
        }
        Self::from_atom(Atom::Cos(arg), 1)
    }

    pub fn sqrt(arg: ScalarExpr) -> Self {
        if let Some(r) = arg.as_rational() {
            if let (Some(n), Some(d)) = (exact_sqrt(r.numer()), exact_sqrt(r.denom())) {
                return Self::rational(BigRational::new(n, d));
            }
        }
        Self::from_atom(Atom::Sqrt(arg), 1)
    }

    pub fn abs(arg: ScalarExpr) -> Self {
        if let Some(r) = arg.as_rational() {
            return Self::rational(r.abs());
        }
        Self::from_atom(Atom::Abs(arg), 1)
    }

    /// Rebuild from scratch through the smart constructors. The result is
    /// identical to `self` for any value produced by this module.
    pub fn canonicalize(&self) -> Result<Self> {
        let mut acc = ScalarExpr::zero();
        for (mono, coeff) in &self.terms {
            let mut term = ScalarExpr::rational(coeff.clone());
            for (atom, p) in mono {
                let base = match atom {
                    Atom::Symbol(s) => ScalarExpr::symbol(s.clone()),
                    Atom::Sin(u) => ScalarExpr::sin(u.canonicalize()?),
                    Atom::Cos(u) => ScalarExpr::cos(u.canonicalize()?),
                    Atom::Sqrt(u) => ScalarExpr::sqrt(u.canonicalize()?),
                    Atom::Abs(u) => ScalarExpr::abs(u.canonicalize()?),
                    Atom::Recip(u) => u.canonicalize()?.reciprocal()?,
                };
                term = &term * &base.pow(i64::from(*p))?;
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Partial derivative with respect to `s`.
    pub fn differentiate(&self, s: &Sym) -> Result<Self> {
        let mut acc = ScalarExpr::zero();
        for (mono, coeff) in &self.terms {
            for (i, (atom, p)) in mono.iter().enumerate() {
                let inner = atom_derivative(atom, s)?;
                if inner.is_zero() {
                    continue;
                }
                let mut rest = mono.clone();
                if *p == 1 {
                    rest.remove(i);
                } else {
                    rest[i].1 -= 1;
                }
                let factor = ScalarExpr {
                    terms: vec![(rest, coeff * BigRational::from_integer(BigInt::from(*p)))],
                };
                acc = &acc + &(&factor * &inner);
            }
        }
        Ok(acc)
    }

    /// Partial derivative with respect to an expression that must be a bare symbol.
    pub fn differentiate_by(&self, var: &ScalarExpr) -> Result<Self> {
        match var.as_symbol() {
            Some(s) => self.differentiate(s),
            None => Err(Error::Type(format!(
                "cannot differentiate with respect to non-symbol {var}"
            ))),
        }
    }

    pub fn evaluate_at(&self, bindings: &HashMap<String, f64>) -> Result<f64> {
        let mut total = 0.0;
        for (mono, coeff) in &self.terms {
            let mut term = rational_to_f64(coeff);
            for (atom, p) in mono {
                let v = atom_value(atom, bindings)?;
                if *p < 0 && v == 0.0 {
                    return Err(Error::Arithmetic("division by zero".into()));
                }
                term *= v.powi(*p);
            }
            total += term;
        }
        Ok(total)
    }

    /// Names of every symbol occurring anywhere in the expression.
    pub fn free_symbols(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Sym>) {
        for (mono, _) in &self.terms {
            for (atom, _) in mono {
                match atom {
                    Atom::Symbol(s) => {
                        out.insert(s.clone());
                    }
                    Atom::Sin(u) | Atom::Cos(u) | Atom::Sqrt(u) | Atom::Abs(u) | Atom::Recip(u) => {
                        u.collect_symbols(out)
                    }
                }
            }
        }
    }
}

fn atom_derivative(atom: &Atom, s: &Sym) -> Result<ScalarExpr> {
    Ok(match atom {
        Atom::Symbol(x) if x == s => ScalarExpr::one(),
        Atom::Symbol(_) => ScalarExpr::zero(),
        Atom::Sin(u) => &ScalarExpr::cos(u.clone()) * &u.differentiate(s)?,
        Atom::Cos(u) => -(&ScalarExpr::sin(u.clone()) * &u.differentiate(s)?),
        Atom::Sqrt(u) => {
            let du = u.differentiate(s)?;
            let half = BigRational::new(BigInt::from(1), BigInt::from(2));
            (&du * &ScalarExpr::from_atom(Atom::Sqrt(u.clone()), -1)).scale(&half)
        }
        Atom::Abs(u) => {
            if u.differentiate(s)?.is_zero() {
                ScalarExpr::zero()
            } else {
                return Err(Error::Type("differentiation of abs is unsupported".into()));
            }
        }
        Atom::Recip(p) => {
            let dp = p.differentiate(s)?;
            -(&dp * &ScalarExpr::from_atom(Atom::Recip(p.clone()), 2))
        }
    })
}

fn atom_value(atom: &Atom, bindings: &HashMap<String, f64>) -> Result<f64> {
    Ok(match atom {
        Atom::Symbol(s) => *bindings
            .get(s.name())
            .ok_or_else(|| Error::Unbound(format!("no numeric value bound for symbol {s}")))?,
        Atom::Sin(u) => u.evaluate_at(bindings)?.sin(),
        Atom::Cos(u) => u.evaluate_at(bindings)?.cos(),
        Atom::Sqrt(u) => {
            let v = u.evaluate_at(bindings)?;
            if v < 0.0 {
                return Err(Error::Arithmetic(format!("square root of negative value {v}")));
            }
            v.sqrt()
        }
        Atom::Abs(u) => u.evaluate_at(bindings)?.abs(),
        Atom::Recip(u) => {
            let v = u.evaluate_at(bindings)?;
            if v == 0.0 {
                return Err(Error::Arithmetic("division by zero".into()));
            }
            1.0 / v
        }
    })
}

impl From<i64> for ScalarExpr {
    fn from(n: i64) -> Self {
        ScalarExpr::int(n)
    }
}

impl From<Sym> for ScalarExpr {
    fn from(s: Sym) -> Self {
        ScalarExpr::symbol(s)
    }
}

impl Add for &ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::from_terms(self.terms.iter().chain(rhs.terms.iter()).cloned())
    }
}

impl Sub for &ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: &ScalarExpr) -> ScalarExpr {
        self + &(-rhs)
    }
}

impl Mul for &ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: &ScalarExpr) -> ScalarExpr {
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                *map.entry(multiply_monomials(ma, mb))
                    .or_insert_with(BigRational::zero) += ca * cb;
            }
        }
        ScalarExpr::from_map(map)
    }
}

impl Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        -&self
    }
}

impl Add for ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: ScalarExpr) -> ScalarExpr {
        &self + &rhs
    }
}

impl Sub for ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: ScalarExpr) -> ScalarExpr {
        &self - &rhs
    }
}

impl Mul for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: ScalarExpr) -> ScalarExpr {
        &self * &rhs
    }
}

// Printing, in prefix notation: `(* -1 r (sin θ))`, `(/ 1 r^2)`, `(+ a b)`.

fn write_base(f: &mut fmt::Formatter<'_>, atom: &Atom) -> fmt::Result {
    match atom {
        Atom::Symbol(s) => write!(f, "{s}"),
        Atom::Sin(u) => write!(f, "(sin {u})"),
        Atom::Cos(u) => write!(f, "(cos {u})"),
        Atom::Sqrt(u) => write!(f, "(sqrt {u})"),
        Atom::Abs(u) => write!(f, "(abs {u})"),
        Atom::Recip(u) => write!(f, "{u}"),
    }
}

struct Factor<'a>(&'a Atom, i32);

impl fmt::Display for Factor<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_base(f, self.0)?;
        if self.1 > 1 {
            write!(f, "^{}", self.1)?;
        }
        Ok(())
    }
}

fn write_product(f: &mut fmt::Formatter<'_>, coeff: &BigInt, factors: &[Factor<'_>]) -> fmt::Result {
    let show_coeff = !coeff.is_one() || factors.is_empty();
    match (show_coeff, factors) {
        (true, []) => write!(f, "{coeff}"),
        (false, [only]) => write!(f, "{only}"),
        _ => {
            f.write_str("(*")?;
            if show_coeff {
                write!(f, " {coeff}")?;
            }
            for fac in factors {
                write!(f, " {fac}")?;
            }
            f.write_str(")")
        }
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, mono: &Monomial, coeff: &BigRational) -> fmt::Result {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (atom, p) in mono {
        match atom {
            Atom::Recip(_) if *p > 0 => den.push(Factor(atom, *p)),
            Atom::Recip(_) => num.push(Factor(atom, -p)),
            _ if *p > 0 => num.push(Factor(atom, *p)),
            _ => den.push(Factor(atom, -p)),
        }
    }
    if den.is_empty() && coeff.denom().is_one() {
        return write_product(f, coeff.numer(), &num);
    }
    f.write_str("(/ ")?;
    write_product(f, coeff.numer(), &num)?;
    f.write_str(" ")?;
    write_product(f, coeff.denom(), &den)?;
    f.write_str(")")
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.terms.as_slice() {
            [] => f.write_str("0"),
            [(m, c)] => write_term(f, m, c),
            terms => {
                f.write_str("(+")?;
                for (m, c) in terms {
                    f.write_str(" ")?;
                    write_term(f, m, c)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
