use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_rational::Rational64;
use num_traits::{One, Zero};

/// Exact coefficient: Gaussian rational `a + b i`.
pub type Coeff = Complex<Rational64>;

fn rational(n: i64, d: i64) -> Coeff {
    Complex::new(Rational64::new(n, d), Rational64::zero())
}

/// Non-commuting generators. Starred symbols are the formal conjugates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    P,
    Q,
    PStar,
    QStar,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symbol::P => "p",
            Symbol::Q => "q",
            Symbol::PStar => "p*",
            Symbol::QStar => "q*",
        })
    }
}

/// An ordered word in the generators times `ω^omega_power`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub word: Vec<Symbol>,
    pub omega_power: i32,
}

/// Linear combination of monomials with exact coefficients.
///
/// Terms live in a sorted map and zero coefficients are never stored, so two
/// expressions are equal exactly when they are structurally equal.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NcExpression {
    terms: BTreeMap<Monomial, Coeff>,
}

impl NcExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(coeff: Coeff, omega_power: i32, word: &[Symbol]) -> Self {
        let mut e = Self::zero();
        e.accumulate(
            Monomial {
                word: word.to_vec(),
                omega_power,
            },
            coeff,
        );
        e
    }

    pub fn constant(coeff: Coeff) -> Self {
        Self::term(coeff, 0, &[])
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::term(Coeff::one(), 0, &[s])
    }

    /// `ω^power` as an expression.
    pub fn omega(power: i32) -> Self {
        Self::term(Coeff::one(), power, &[])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(&mut self, m: Monomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                let sum = *slot.get() + c;
                if sum.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: Coeff) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.accumulate(m.clone(), *v * c);
        }
        out
    }

    /// Replaces every generator with an expression, preserving word order.
    pub fn substitute(&self, f: impl Fn(Symbol) -> NcExpression) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut prod = Self::term(*c, m.omega_power, &[]);
            for &s in &m.word {
                prod = prod * f(s);
            }
            out = out + prod;
        }
        out
    }

    /// Image in the commutative quotient: letters inside each word are sorted.
    pub fn commutative_specialization(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut word = m.word.clone();
            word.sort();
            out.accumulate(
                Monomial {
                    word,
                    omega_power: m.omega_power,
                },
                *c,
            );
        }
        out
    }

    /// `½(p p* + ω² q q*)`.
    pub fn mode_hamiltonian() -> Self {
        let half = rational(1, 2);
        Self::term(half, 0, &[Symbol::P, Symbol::PStar])
            + Self::term(half, 2, &[Symbol::Q, Symbol::QStar])
    }

    /// `½ω(pq − qp)`.
    pub fn half_omega_commutator() -> Self {
        let half = rational(1, 2);
        Self::term(half, 1, &[Symbol::P, Symbol::Q]) - Self::term(half, 1, &[Symbol::Q, Symbol::P])
    }
}

impl Add for NcExpression {
    type Output = NcExpression;
    fn add(mut self, rhs: NcExpression) -> NcExpression {
        for (m, c) in rhs.terms {
            self.accumulate(m, c);
        }
        self
    }
}

impl Neg for NcExpression {
    type Output = NcExpression;
    fn neg(self) -> NcExpression {
        self.scale(-Coeff::one())
    }
}

impl Sub for NcExpression {
    type Output = NcExpression;
    fn sub(self, rhs: NcExpression) -> NcExpression {
        self + (-rhs)
    }
}

impl Mul for NcExpression {
    type Output = NcExpression;
    fn mul(self, rhs: NcExpression) -> NcExpression {
        let mut out = NcExpression::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let mut word = a.word.clone();
                word.extend_from_slice(&b.word);
                out.accumulate(
                    Monomial {
                        word,
                        omega_power: a.omega_power + b.omega_power,
                    },
                    *ca * *cb,
                );
            }
        }
        out
    }
}

fn fmt_coeff(c: &Coeff) -> String {
    let re = c.re;
    let im = c.im;
    match (re.is_zero(), im.is_zero()) {
        (_, true) => re.to_string(),
        (true, false) => format!("{im}i"),
        _ => format!("({re} + {im}i)"),
    }
}

impl fmt::Display for NcExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            f.write_str(&fmt_coeff(c))?;
            match m.omega_power {
                0 => {}
                1 => f.write_str(" ω")?,
                k => write!(f, " ω^{k}")?,
            }
            for s in &m.word {
                write!(f, " {s}")?;
            }
        }
        Ok(())
    }
}

/// How the starred symbols are eliminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjugationRules {
    /// `p* → ω q`, `q* → −p/ω`, the rules that turn the mode energy into a commutator.
    OmegaSwap,
    /// Literal conjugation of the plane-wave relation `p = −iωq`:
    /// `p → −iω q`, `p* → iω q*`, with `q` and `q*` kept.
    ComplexConjugate,
    /// `p* → p`, `q* → q`.
    Identity,
}

pub fn reduce_with(rules: ConjugationRules) -> NcExpression {
    let i = Complex::new(Rational64::zero(), Rational64::one());
    NcExpression::mode_hamiltonian().substitute(|s| match (rules, s) {
        (ConjugationRules::OmegaSwap, Symbol::PStar) => {
            NcExpression::term(Coeff::one(), 1, &[Symbol::Q])
        }
        (ConjugationRules::OmegaSwap, Symbol::QStar) => {
            NcExpression::term(-Coeff::one(), -1, &[Symbol::P])
        }
        (ConjugationRules::ComplexConjugate, Symbol::P) => NcExpression::term(-i, 1, &[Symbol::Q]),
        (ConjugationRules::ComplexConjugate, Symbol::PStar) => {
            NcExpression::term(i, 1, &[Symbol::QStar])
        }
        (ConjugationRules::Identity, Symbol::PStar) => NcExpression::symbol(Symbol::P),
        (ConjugationRules::Identity, Symbol::QStar) => NcExpression::symbol(Symbol::Q),
        (_, s) => NcExpression::symbol(s),
    })
}

/// `½(pp* + ω²qq*)` reduced with the ω-swap conjugation rules.
pub fn reduce_mode_hamiltonian() -> NcExpression {
    reduce_with(ConjugationRules::OmegaSwap)
}
