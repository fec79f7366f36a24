//! Formal motive expressions: Tate twists, the invertible motives `L_α`,
//! Rost-type binary summands twisted by `L_α`, and opaque kernel summands.
//!
//! Symbols live in an F_2-vector space with named generators. In periodic
//! mode (Morava K-theory with `v_n` inverted) twists are read modulo `2^n - 1`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::FormProfile;

/// An F_2-linear combination of named generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(BTreeSet<String>);

impl Symbol {
    pub fn zero() -> Self {
        Symbol(BTreeSet::new())
    }

    pub fn generator(name: &str) -> Self {
        Symbol(std::iter::once(name.to_string()).collect())
    }

    /// Parses `"a+b"`, `"a"` or `"0"`. Repeated generators cancel.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Symbol::zero();
        for part in text.split('+').map(str::trim) {
            if part.is_empty() || part == "0" {
                continue;
            }
            if !part.chars().all(|c| c.is_alphanumeric() || "_'[]()".contains(c)) {
                return Err(Error::InvalidArgument(format!("bad symbol generator {part:?}")));
            }
            out = out.add(&Symbol::generator(part));
        }
        Ok(out)
    }

    pub fn generators(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &Symbol) -> Symbol {
        Symbol(self.0.symmetric_difference(&o.0).cloned().collect())
    }

    /// Image in the quotient by `⟨α⟩`, normalized so that the largest
    /// generator of `α` never occurs.
    pub fn kill(&self, alpha: &Symbol) -> Symbol {
        match alpha.0.iter().next_back() {
            Some(pivot) if self.0.contains(pivot) => self.add(alpha),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<&str> = self.generators().collect();
        write!(f, "{}", parts.join("+"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwistMode {
    /// Integer twists.
    Graded,
    /// Twists modulo `2^n - 1`.
    Periodic(u32),
}

impl TwistMode {
    pub fn reduce(self, i: i64) -> i64 {
        match self {
            TwistMode::Graded => i,
            TwistMode::Periodic(n) => i.rem_euclid((1i64 << n) - 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SummandKind {
    Tate,
    L { symbol: Symbol },
    /// `R_label ⊗ L_symbol`; the two cells of `R_label` sit `span` apart.
    RostTensor { label: String, span: u32, symbol: Symbol },
    Kernel { label: String, symbol: Symbol },
}

impl SummandKind {
    fn rank(&self) -> u8 {
        match self {
            SummandKind::Tate => 0,
            SummandKind::L { .. } => 1,
            SummandKind::RostTensor { .. } => 2,
            SummandKind::Kernel { .. } => 3,
        }
    }

    pub fn symbol(&self) -> Symbol {
        match self {
            SummandKind::Tate => Symbol::zero(),
            SummandKind::L { symbol }
            | SummandKind::RostTensor { symbol, .. }
            | SummandKind::Kernel { symbol, .. } => symbol.clone(),
        }
    }

    fn with_symbol(&self, s: Symbol) -> SummandKind {
        match self {
            SummandKind::Tate | SummandKind::L { .. } => {
                if s.is_zero() {
                    SummandKind::Tate
                } else {
                    SummandKind::L { symbol: s }
                }
            }
            SummandKind::RostTensor { label, span, .. } => {
                SummandKind::RostTensor { label: label.clone(), span: *span, symbol: s }
            }
            SummandKind::Kernel { label, .. } => SummandKind::Kernel { label: label.clone(), symbol: s },
        }
    }

    pub fn is_invertible(&self) -> bool {
        matches!(self, SummandKind::Tate | SummandKind::L { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Summand {
    #[serde(flatten)]
    pub kind: SummandKind,
    pub twist: i64,
}

impl Summand {
    fn sort_key(&self) -> (u8, String, String, u32, i64) {
        let (label, sym, span) = match &self.kind {
            SummandKind::Tate => (String::new(), String::new(), 0),
            SummandKind::L { symbol } => (String::new(), symbol.to_string(), 0),
            SummandKind::RostTensor { label, symbol, span } => (label.clone(), symbol.to_string(), *span),
            SummandKind::Kernel { label, symbol } => (label.clone(), symbol.to_string(), 0),
        };
        (self.kind.rank(), sym, label, span, self.twist)
    }
}

impl PartialOrd for Summand {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Summand {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&o.sort_key())
    }
}

impl fmt::Display for Summand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tail = |s: &Symbol| if s.is_zero() { String::new() } else { format!(" ⊗ L_{s}") };
        match &self.kind {
            SummandKind::Tate => write!(f, "1({})", self.twist),
            SummandKind::L { symbol } => write!(f, "L_{symbol}({})", self.twist),
            SummandKind::RostTensor { label, symbol, .. } => {
                write!(f, "R_[{label}]{}({})", tail(symbol), self.twist)
            }
            SummandKind::Kernel { label, symbol } => write!(f, "Ker[{label}]{}({})", tail(symbol), self.twist),
        }
    }
}

/// A direct sum of summands, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MotiveExpr {
    mode: TwistMode,
    summands: Vec<Summand>,
}

impl MotiveExpr {
    pub fn zero(mode: TwistMode) -> Self {
        MotiveExpr { mode, summands: Vec::new() }
    }

    pub fn single(mode: TwistMode, kind: SummandKind, twist: i64) -> Self {
        let mut m = MotiveExpr::zero(mode);
        m.push(kind, twist);
        m
    }

    pub fn tate(mode: TwistMode, i: i64) -> Self {
        MotiveExpr::single(mode, SummandKind::Tate, i)
    }

    pub fn l(mode: TwistMode, alpha: &Symbol, i: i64) -> Self {
        MotiveExpr::single(mode, SummandKind::L { symbol: alpha.clone() }, i)
    }

    pub fn mode(&self) -> TwistMode {
        self.mode
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// Adds one summand, normalizing `L_0` to a Tate motive and reducing the twist.
    pub fn push(&mut self, kind: SummandKind, twist: i64) {
        let kind = kind.with_symbol(kind.symbol());
        let s = Summand { kind, twist: self.mode.reduce(twist) };
        let at = self.summands.partition_point(|x| x <= &s);
        self.summands.insert(at, s);
    }

    fn check_mode(&self, o: &MotiveExpr) -> Result<()> {
        if self.mode != o.mode {
            return Err(Error::ModeMismatch(format!("{:?} vs {:?}", self.mode, o.mode)));
        }
        Ok(())
    }

    /// Direct sum.
    pub fn sum(&self, o: &MotiveExpr) -> Result<MotiveExpr> {
        self.check_mode(o)?;
        let mut out = self.clone();
        for s in &o.summands {
            out.push(s.kind.clone(), s.twist);
        }
        Ok(out)
    }

    /// Tensor product, distributed over both sums. At least one factor of
    /// every pair of summands must be invertible.
    pub fn tensor(&self, o: &MotiveExpr) -> Result<MotiveExpr> {
        self.check_mode(o)?;
        let mut out = MotiveExpr::zero(self.mode);
        for a in &self.summands {
            for b in &o.summands {
                let (inv, other) = if a.kind.is_invertible() {
                    (a, b)
                } else if b.kind.is_invertible() {
                    (b, a)
                } else {
                    return Err(Error::Unsupported(format!("tensor of {a} and {b}")));
                };
                let sym = inv.kind.symbol().add(&other.kind.symbol());
                out.push(other.kind.with_symbol(sym), a.twist + b.twist);
            }
        }
        Ok(out)
    }

    /// Base change to a field where `α` dies.
    pub fn base_change_kill(&self, alpha: &Symbol) -> MotiveExpr {
        let mut out = MotiveExpr::zero(self.mode);
        for s in &self.summands {
            out.push(s.kind.with_symbol(s.kind.symbol().kill(alpha)), s.twist);
        }
        out
    }

    /// Splits every `R_label ⊗ L_β(i)` into `L_β(i) ⊕ L_β(i + span)`, modelling
    /// a base change that kills the class behind `label`.
    pub fn split_label(&self, label: &str) -> MotiveExpr {
        let mut out = MotiveExpr::zero(self.mode);
        for s in &self.summands {
            match &s.kind {
                SummandKind::RostTensor { label: l, span, symbol } if l == label => {
                    let lk = SummandKind::L { symbol: symbol.clone() };
                    out.push(lk.clone(), s.twist);
                    out.push(lk, s.twist + *span as i64);
                }
                k => out.push(k.clone(), s.twist),
            }
        }
        out
    }

    pub fn count(&self, kind: &SummandKind, twist: i64) -> usize {
        let t = self.mode.reduce(twist);
        self.summands.iter().filter(|s| &s.kind == kind && s.twist == t).count()
    }

    /// Tate summands gained at twist `j` by killing `α`; this is the number of
    /// summands `L_α(j)`.
    pub fn detect_count(&self, alpha: &Symbol, j: i64) -> Result<i64> {
        if !matches!(self.mode, TwistMode::Periodic(_)) {
            return Err(Error::ModeMismatch("detect_count needs periodic twists".into()));
        }
        let before = self.count(&SummandKind::Tate, j) as i64;
        let after = self.base_change_kill(alpha).count(&SummandKind::Tate, j) as i64;
        Ok(after - before)
    }
}

impl fmt::Display for MotiveExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.summands.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.summands.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

/// `⊕_{i=0}^{2^n-1} 1(i) ⊕ L_α(i)`, the Morava motive of an `(n+1)`-fold
/// Pfister quadric.
pub fn pfister_motive(n: u32, alpha: &Symbol) -> MotiveExpr {
    let mode = TwistMode::Periodic(n);
    let mut m = MotiveExpr::zero(mode);
    for i in 0..(1i64 << n) {
        m.push(SummandKind::Tate, i);
        m.push(SummandKind::L { symbol: alpha.clone() }, i);
    }
    m
}

/// The symbol `ω_{n+1}(q)` named by the profile, `alpha` when unnamed.
pub fn profile_symbol(p: &FormProfile, n: u32) -> Result<Symbol> {
    match p.symbols.get(&n) {
        Some(s) => Symbol::parse(s),
        None => Ok(Symbol::generator("alpha")),
    }
}

/// Where the summands of a small Kahn decomposition sit: each summand kind
/// with the window cells it covers, lowest first, as `(position, lower)`.
/// `lower` marks the lower of the two middle cells.
pub type KahnLayout = Vec<(SummandKind, Vec<(i64, bool)>)>;

/// Window cells and summand placement for the small Kahn decomposition of
/// the kernel of `Q`: `2^n - dim_n q` twists of `L_α` and `M(Q') ⊗ L_α`.
pub fn small_kahn_layout(p: &FormProfile, n: u32) -> Result<KahnLayout> {
    let big = 1i64 << n;
    if (p.dim as i64) < big.max(2) {
        return Err(Error::InvalidArgument(format!("dim q = {} is below 2^{n}", p.dim)));
    }
    let m = p
        .kahn(n)
        .ok_or_else(|| Error::MissingData(format!("kahn_dims[{n}] is required")))? as i64;
    if m > big {
        return Err(Error::InvalidArgument(format!("dim_{n} q = {m} exceeds 2^{n}")));
    }
    if m % 2 != p.dim as i64 % 2 {
        return Err(Error::Parity(format!("dim_{n} q = {m} and dim q = {} differ in parity", p.dim)));
    }
    let alpha = profile_symbol(p, n)?;
    let dd = p.dim as i64 - 2;
    let d = dd / 2;
    let even = dd % 2 == 0;
    let start = d - big / 2 + 1;
    let end = d + big / 2 - 1;
    let mut free: Vec<(i64, bool)> = Vec::new();
    for pos in start..=end {
        free.push((pos, false));
        if even && pos == d {
            free.push((pos, true));
        }
    }
    let mut out: KahnLayout = Vec::new();
    if m >= 2 {
        let dq = m - 2;
        let t = d - dq / 2;
        let mut cells: Vec<(i64, bool)> = Vec::new();
        for c in 0..=dq {
            cells.push((t + c, false));
            if dq % 2 == 0 && c == dq / 2 {
                cells.push((t + c, true));
            }
        }
        free.retain(|c| !cells.contains(c));
        let disc_trivial = p.kahn(1) == Some(0) || p.disc_trivial == Some(true);
        let rost = |label: &str, span: u32| SummandKind::RostTensor {
            label: label.into(),
            span,
            symbol: alpha.clone(),
        };
        match m {
            2 => out.push((rost("disc(q)", 0), cells)),
            3 => out.push((rost("C0(q)", 1), cells)),
            4 if disc_trivial => {
                // the split-discriminant quadric surface is R ⊕ R(1)
                out.push((rost("C(q)", 1), vec![cells[0], cells[1]]));
                out.push((rost("C(q)", 1), vec![cells[2], cells[3]]));
            }
            _ => out.push((
                SummandKind::Kernel { label: "Q'".into(), symbol: alpha.clone() },
                cells,
            )),
        }
    }
    for c in free {
        out.push((SummandKind::L { symbol: alpha.clone() }, vec![c]));
    }
    Ok(out)
}

/// The small Kahn decomposition of the `K(n)`-kernel motive as an expression.
pub fn small_kahn_decomposition(p: &FormProfile, n: u32) -> Result<MotiveExpr> {
    let mut m = MotiveExpr::zero(TwistMode::Periodic(n));
    for (kind, cells) in small_kahn_layout(p, n)? {
        m.push(kind, cells[0].0);
    }
    Ok(m)
}
