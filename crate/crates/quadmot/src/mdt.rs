//! Motivic decomposition type diagrams.
//!
//! A Chow diagram for a quadric of dimension `D` has one cell per Tate
//! position `0..=D`, with the middle position `d = D/2` doubled into an upper
//! and a lower cell when `D` is even. A Morava `K(n)` diagram keeps only the
//! window `[d - 2^{n-1} + 1, d + 2^{n-1} - 1]` (middle doubled again); the
//! remaining positions are complementary Tate motives (grey dots).
//!
//! Outside the window every cell `j` is paired with a window cell at distance
//! `2^n - 1`; these outer excellent connections are what
//! [`chow_to_morava`] contracts and [`morava_to_chow`] adds back.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{kn_kernel_index, FormProfile};
use crate::motives::{profile_symbol, small_kahn_layout, MotiveExpr, Symbol, SummandKind, TwistMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Plain,
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub position: i64,
    pub role: Role,
}

impl Cell {
    pub fn plain(position: i64) -> Self {
        Cell { position, role: Role::Plain }
    }

    pub fn upper(position: i64) -> Self {
        Cell { position, role: Role::Upper }
    }

    pub fn lower(position: i64) -> Self {
        Cell { position, role: Role::Lower }
    }

    /// Parses `"5"`, `"3u"` or `"3l"`.
    pub fn parse(id: &str) -> Result<Self> {
        let id = id.trim();
        let (num, role) = match id.chars().last() {
            Some('u') => (&id[..id.len() - 1], Role::Upper),
            Some('l') => (&id[..id.len() - 1], Role::Lower),
            _ => (id, Role::Plain),
        };
        let position = num
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad cell identifier {id:?}")))?;
        Ok(Cell { position, role })
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            Role::Plain => write!(f, "{}", self.position),
            Role::Upper => write!(f, "{}u", self.position),
            Role::Lower => write!(f, "{}l", self.position),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Chow,
    Morava(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub cells: Vec<Cell>,
    pub label: Option<MotiveExpr>,
}

/// A partition of the cells of a Chow or Morava diagram into components.
///
/// Components are kept sorted by their lowest cell, cells sorted inside each
/// component, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "DiagramJson", try_from = "DiagramJson")]
pub struct MDTDiagram {
    flavor: Flavor,
    dim: u32,
    anisotropic: bool,
    cells: Vec<Cell>,
    components: Vec<Component>,
    complementary_tates: Vec<i64>,
}

fn outer_len(n: u32) -> i64 {
    (1i64 << n) - 1
}

/// All Chow cells of a quadric of dimension `dim`.
pub fn chow_cells(dim: u32) -> Vec<Cell> {
    let dd = dim as i64;
    let mut out = Vec::new();
    for p in 0..=dd {
        if dd % 2 == 0 && p == dd / 2 {
            out.push(Cell::upper(p));
            out.push(Cell::lower(p));
        } else {
            out.push(Cell::plain(p));
        }
    }
    out
}

/// The `K(n)` window: cells at positions `d - 2^{n-1} + 1 ..= d + 2^{n-1} - 1`.
pub fn window_cells(n: u32, dim: u32) -> Vec<Cell> {
    let dd = dim as i64;
    let d = dd / 2;
    let half = 1i64 << (n - 1);
    let lo = (d - half + 1).max(0);
    let hi = (d + half - 1).min(dd);
    chow_cells(dim).into_iter().filter(|c| (lo..=hi).contains(&c.position)).collect()
}

/// The Chow cell joined to a window cell by an outer excellent connection.
pub fn outer_partner(n: u32, dim: u32, c: Cell) -> Option<Cell> {
    let k = outer_len(n);
    let dd = dim as i64;
    let down = (c.position - k >= 0).then(|| Cell::plain(c.position - k));
    let up = (c.position + k <= dd).then(|| Cell::plain(c.position + k));
    match c.role {
        Role::Upper => down,
        Role::Lower => up,
        Role::Plain => down.or(up),
    }
}

impl MDTDiagram {
    /// Builds a diagram from a list of components and checks that they
    /// partition the expected cell set.
    pub fn new(flavor: Flavor, dim: u32, components: Vec<Vec<Cell>>) -> Result<Self> {
        let expected = match flavor {
            Flavor::Chow => chow_cells(dim),
            Flavor::Morava(n) => {
                if n == 0 {
                    return Err(Error::InvalidArgument("height must be positive".into()));
                }
                window_cells(n, dim)
            }
        };
        let mut seen = BTreeSet::new();
        let mut comps = Vec::new();
        for comp in components {
            if comp.is_empty() {
                return Err(Error::InvalidArgument("empty component".into()));
            }
            let mut cells = comp;
            cells.sort();
            for c in &cells {
                if !seen.insert(*c) {
                    return Err(Error::InvalidArgument(format!("cell {c} appears twice")));
                }
            }
            comps.push(Component { cells, label: None });
        }
        let want: BTreeSet<Cell> = expected.iter().copied().collect();
        if seen != want {
            let extra: Vec<String> = seen.difference(&want).map(ToString::to_string).collect();
            let missing: Vec<String> = want.difference(&seen).map(ToString::to_string).collect();
            return Err(Error::InvalidArgument(format!(
                "components do not partition the cells (unexpected {extra:?}, missing {missing:?})"
            )));
        }
        comps.sort_by_key(|c| c.cells[0]);
        let complementary_tates = match flavor {
            Flavor::Chow => Vec::new(),
            Flavor::Morava(_) => {
                let inside: BTreeSet<i64> = expected.iter().map(|c| c.position).collect();
                (0..=dim as i64).filter(|p| !inside.contains(p)).collect()
            }
        };
        Ok(MDTDiagram { flavor, dim, anisotropic: true, cells: expected, components: comps, complementary_tates })
    }

    /// Same as [`MDTDiagram::new`] with cells given by identifier.
    pub fn from_ids(flavor: Flavor, dim: u32, components: &[&[&str]]) -> Result<Self> {
        let comps = components
            .iter()
            .map(|c| c.iter().map(|id| Cell::parse(id)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        MDTDiagram::new(flavor, dim, comps)
    }

    /// Every cell in its own component.
    pub fn singletons(flavor: Flavor, dim: u32) -> Result<Self> {
        let cells = match flavor {
            Flavor::Chow => chow_cells(dim),
            Flavor::Morava(n) => window_cells(n, dim),
        };
        MDTDiagram::new(flavor, dim, cells.into_iter().map(|c| vec![c]).collect())
    }

    pub fn with_anisotropic(mut self, flag: bool) -> Self {
        self.anisotropic = flag;
        self
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn anisotropic(&self) -> bool {
        self.anisotropic
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn complementary_tates(&self) -> &[i64] {
        &self.complementary_tates
    }

    /// The components as sets of cell identifiers, for comparisons that
    /// ignore labels.
    pub fn partition(&self) -> Vec<Vec<String>> {
        self.components.iter().map(|c| c.cells.iter().map(ToString::to_string).collect()).collect()
    }

    pub fn component_of(&self, c: Cell) -> Option<usize> {
        self.components.iter().position(|k| k.cells.contains(&c))
    }

    /// Attaches a label to the component containing `c`.
    pub fn set_label(&mut self, c: Cell, label: MotiveExpr) -> Result<()> {
        let i = self
            .component_of(c)
            .ok_or_else(|| Error::InvalidArgument(format!("no cell {c} in the diagram")))?;
        self.components[i].label = Some(label);
        Ok(())
    }

    pub fn labels(&self) -> Vec<Option<&MotiveExpr>> {
        self.components.iter().map(|c| c.label.as_ref()).collect()
    }

    /// Reflection `j ↦ D - j`, exchanging the upper and lower middle cells.
    pub fn dual(&self) -> Result<Self> {
        let dd = self.dim as i64;
        let flip = |c: &Cell| Cell {
            position: dd - c.position,
            role: match c.role {
                Role::Plain => Role::Plain,
                Role::Upper => Role::Lower,
                Role::Lower => Role::Upper,
            },
        };
        let comps = self.components.iter().map(|k| k.cells.iter().map(flip).collect()).collect();
        Ok(MDTDiagram::new(self.flavor, self.dim, comps)?.with_anisotropic(self.anisotropic))
    }

    /// Renames upper and lower middle cells so that the upper one lies in the
    /// component of the lowest window cell whenever that component holds
    /// exactly one middle cell.
    pub fn canonicalize_middles(&mut self) {
        let Some(first) = self.cells.first().copied() else { return };
        let Some(i) = self.component_of(first) else { return };
        let roles: Vec<Role> =
            self.components[i].cells.iter().map(|c| c.role).filter(|r| *r != Role::Plain).collect();
        if roles == [Role::Lower] {
            for comp in &mut self.components {
                for c in &mut comp.cells {
                    c.role = match c.role {
                        Role::Upper => Role::Lower,
                        Role::Lower => Role::Upper,
                        r => r,
                    };
                }
                comp.cells.sort();
            }
            self.components.sort_by_key(|c| c.cells[0]);
        }
    }

    /// Connections drawn in pictures: outer excellent pairs (when `n` is
    /// known and the diagram is Chow), then the shortest links that finish
    /// connecting each component.
    pub fn edges(&self, n: Option<u32>) -> Vec<Edge> {
        let mut out = Vec::new();
        let mut parent: BTreeMap<Cell, Cell> = self.cells.iter().map(|c| (*c, *c)).collect();
        fn root(p: &mut BTreeMap<Cell, Cell>, mut c: Cell) -> Cell {
            while p[&c] != c {
                c = p[&c];
            }
            c
        }
        if let (Flavor::Chow, Some(n)) = (self.flavor, n) {
            for (a, b) in outer_pairs(n, self.dim) {
                if self.component_of(a) == self.component_of(b) {
                    let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                    parent.insert(ra, rb);
                    out.push(Edge { a, b, outer: true });
                }
            }
        }
        for comp in &self.components {
            // shortest joins first, so neighbouring cells are linked directly
            let mut pairs: Vec<(i64, Cell, Cell)> = Vec::new();
            for (i, a) in comp.cells.iter().enumerate() {
                for b in &comp.cells[i + 1..] {
                    pairs.push((b.position - a.position, *a, *b));
                }
            }
            pairs.sort();
            for (_, a, b) in pairs {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                if ra != rb {
                    parent.insert(ra, rb);
                    out.push(Edge { a, b, outer: false });
                }
            }
        }
        out.sort();
        out
    }

    /// Text picture: upper middles above, lower middles below, black cells
    /// `*`, grey dots `o`, `---` between adjacent connected cells.
    pub fn to_ascii(&self, n: Option<u32>) -> String {
        let n = match self.flavor {
            Flavor::Morava(k) => Some(k),
            Flavor::Chow => n,
        };
        let dd = self.dim as i64;
        let width = 4 * dd as usize + 1;
        let mut rows = vec![vec![' '; width]; 3];
        let row_of = |c: &Cell| match c.role {
            Role::Upper => 0,
            Role::Plain => 1,
            Role::Lower => 2,
        };
        for g in &self.complementary_tates {
            rows[1][4 * *g as usize] = 'o';
        }
        for c in &self.cells {
            rows[row_of(c)][4 * c.position as usize] = '*';
        }
        for e in self.edges(n) {
            let (a, b) = (e.a, e.b);
            if b.position == a.position + 1 && (row_of(&a) == 1 || row_of(&b) == 1 || row_of(&a) == row_of(&b)) {
                let r = if row_of(&a) != 1 { row_of(&a) } else { row_of(&b) };
                for x in 4 * a.position as usize + 1..4 * b.position as usize {
                    rows[r][x] = '-';
                }
            }
        }
        let mut out = String::new();
        for r in rows {
            let line: String = r.into_iter().collect();
            let line = line.trim_end();
            if !line.is_empty() {
                out.push_str(line);
                out.push('\n');
            }
        }
        let comps: Vec<String> = self
            .components
            .iter()
            .map(|c| {
                let ids: Vec<String> = c.cells.iter().map(ToString::to_string).collect();
                match &c.label {
                    Some(l) => format!("{{{}}}: {l}", ids.join(" ")),
                    None => format!("{{{}}}", ids.join(" ")),
                }
            })
            .collect();
        for c in comps {
            let _ = writeln!(out, "  {c}");
        }
        let edges: Vec<String> = self
            .edges(n)
            .iter()
            .map(|e| format!("{}{}{}", e.a, if e.outer { "~" } else { "-" }, e.b))
            .collect();
        if !edges.is_empty() {
            let _ = writeln!(out, "  edges: {}", edges.join(" "));
        }
        if !self.complementary_tates.is_empty() {
            let g: Vec<String> = self.complementary_tates.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "  grey: {}", g.join(" "));
        }
        out
    }

    /// SVG picture with 40-unit spacing; outer excellent connections in red.
    pub fn to_svg(&self, n: Option<u32>) -> String {
        let n = match self.flavor {
            Flavor::Morava(k) => Some(k),
            Flavor::Chow => n,
        };
        let x = |p: i64| 40 + 40 * p;
        let y = |c: &Cell| match c.role {
            Role::Upper => 60,
            Role::Plain => 70,
            Role::Lower => 80,
        };
        let w = x(self.dim as i64) + 40;
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="120" viewBox="0 0 {w} 120">"#);
        for e in self.edges(n) {
            let (x1, y1, x2, y2) = (x(e.a.position), y(&e.a), x(e.b.position), y(&e.b));
            let lift = 10 + 6 * (e.b.position - e.a.position);
            let colour = if e.outer { "red" } else { "black" };
            let _ = writeln!(
                s,
                r#"  <path d="M {x1} {y1} Q {} {} {x2} {y2}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
                (x1 + x2) / 2,
                y1.min(y2) - lift
            );
        }
        for g in &self.complementary_tates {
            let _ = writeln!(s, r##"  <circle cx="{}" cy="70" r="5" fill="#aaaaaa"/>"##, x(*g));
        }
        for c in &self.cells {
            let _ = writeln!(s, r##"  <circle cx="{}" cy="{}" r="5" fill="#000000"/>"##, x(c.position), y(c));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub a: Cell,
    pub b: Cell,
    pub outer: bool,
}

/// Pairs of Chow cells at distance `2^n - 1`, with the middle rule: a pair
/// ending at the middle uses the upper cell, one starting there the lower.
pub fn outer_pairs(n: u32, dim: u32) -> Vec<(Cell, Cell)> {
    let k = outer_len(n);
    let dd = dim as i64;
    let mid = (dd % 2 == 0).then_some(dd / 2);
    let mut out = Vec::new();
    for j in 0..=dd - k {
        let a = if Some(j) == mid { Cell::lower(j) } else { Cell::plain(j) };
        let b = if Some(j + k) == mid { Cell::upper(j + k) } else { Cell::plain(j + k) };
        out.push((a, b));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OuterReport {
    pub checked: usize,
    pub violations: Vec<(String, String)>,
}

impl OuterReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_chow_input(m: &MDTDiagram, n: u32) -> Result<()> {
    if m.flavor != Flavor::Chow {
        return Err(Error::ModeMismatch("expected a Chow diagram".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("height must be positive".into()));
    }
    if !m.anisotropic {
        return Err(Error::InvalidArgument(
            "outer connections are stated for anisotropic quadrics; reduce the isotropic part first".into(),
        ));
    }
    if m.dim as i64 > 2 * outer_len(n) {
        return Err(Error::Unsupported(format!(
            "D = {} lies above the K({n}) window; apply stable_reduce first",
            m.dim
        )));
    }
    Ok(())
}

/// Checks that cells joined by outer excellent connections share a component.
pub fn check_outer_excellent(m: &MDTDiagram, n: u32) -> Result<OuterReport> {
    check_chow_input(m, n)?;
    let pairs = outer_pairs(n, m.dim);
    let violations = pairs
        .iter()
        .filter(|(a, b)| m.component_of(*a) != m.component_of(*b))
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    Ok(OuterReport { checked: pairs.len(), violations })
}

/// Restricts a Chow diagram to the `K(n)` window, contracting outer connections.
pub fn chow_to_morava(m: &MDTDiagram, n: u32) -> Result<MDTDiagram> {
    let report = check_outer_excellent(m, n)?;
    if !report.ok() {
        return Err(Error::OuterViolation(format!("disconnected outer pairs {:?}", report.violations)));
    }
    let window: BTreeSet<Cell> = window_cells(n, m.dim).into_iter().collect();
    let comps: Vec<Vec<Cell>> = m
        .components
        .iter()
        .map(|k| k.cells.iter().copied().filter(|c| window.contains(c)).collect::<Vec<_>>())
        .filter(|k| !k.is_empty())
        .collect();
    MDTDiagram::new(Flavor::Morava(n), m.dim, comps)
}

/// Adds the outer excellent connections back to a Morava diagram.
pub fn morava_to_chow(m: &MDTDiagram, n: u32) -> Result<MDTDiagram> {
    if m.flavor != Flavor::Morava(n) {
        return Err(Error::ModeMismatch(format!("expected a K({n}) diagram")));
    }
    if !m.anisotropic {
        return Err(Error::InvalidArgument("morava_to_chow needs an anisotropic diagram".into()));
    }
    if m.dim as i64 > 2 * outer_len(n) {
        return Err(Error::Unsupported(format!("D = {} lies above the K({n}) window", m.dim)));
    }
    let comps: Vec<Vec<Cell>> = m
        .components
        .iter()
        .map(|k| {
            let mut cells = k.cells.clone();
            cells.extend(k.cells.iter().filter_map(|c| outer_partner(n, m.dim, *c)));
            cells
        })
        .collect();
    MDTDiagram::new(Flavor::Chow, m.dim, comps)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableReduction {
    /// Tower level `j` of the `K(n)`-kernel form.
    pub level: usize,
    /// Twist offset `(dim q - dim q_j) / 2`.
    pub offset: u32,
    pub kernel_dim: u32,
    /// All-singleton window of `Q` on which the kernel diagram lives.
    pub shell: MDTDiagram,
}

/// Strips the Tate summands split off before the `K(n)`-kernel level.
pub fn stable_reduce(p: &FormProfile, n: u32) -> Result<StableReduction> {
    if p.dim < 2 {
        return Err(Error::InvalidArgument("the quadric of a form of dimension < 2 is empty".into()));
    }
    let (level, kernel_dim) = kn_kernel_index(p, n)?;
    let shell = MDTDiagram::singletons(Flavor::Morava(n), p.dim - 2)?.with_anisotropic(p.anisotropic);
    Ok(StableReduction { level, offset: (p.dim - kernel_dim) / 2, kernel_dim, shell })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K2Classification {
    /// Table row, e.g. `"odd, dim2 = 3"`.
    pub row: String,
    /// Cells `d-1, d, (d,) d+1` with `–` joining neighbours in one component.
    pub glyph: String,
    pub diagram: MDTDiagram,
}

/// The `K(2)` decomposition type of `Q`, read off the table indexed by the
/// parity of `dim q` and its Kahn dimensions.
pub fn classify_k2(p: &FormProfile) -> Result<K2Classification> {
    if p.dim < 4 {
        return Err(Error::InvalidArgument("classification needs dim Q ≥ 2".into()));
    }
    let k2 = p.kahn(2).ok_or_else(|| Error::MissingData("kahn_dims[2] is required".into()))?;
    if k2 % 2 != p.dim % 2 {
        return Err(Error::Parity(format!("dim_2 q = {k2} and dim q = {} differ in parity", p.dim)));
    }
    let alpha = profile_symbol(p, 2)?;
    let dim = p.dim - 2;
    let d = dim as i64 / 2;
    let mode = TwistMode::Periodic(2);
    let l = |i: i64| MotiveExpr::l(mode, &alpha, i);
    let rost = |label: &str, span: u32, i: i64| {
        MotiveExpr::single(mode, SummandKind::RostTensor { label: label.into(), span, symbol: alpha.clone() }, i)
    };
    let kernel = |label: &str, sym: Symbol| {
        MotiveExpr::single(mode, SummandKind::Kernel { label: label.into(), symbol: sym }, d - 1)
    };
    let (a, u, lo, b) = (Cell::plain(d - 1), Cell::upper(d), Cell::lower(d), Cell::plain(d + 1));
    let mid = Cell::plain(d);
    let (row, comps, labels): (String, Vec<Vec<Cell>>, Vec<MotiveExpr>) = if p.dim % 2 == 1 {
        match k2 {
            1 => ("odd, dim2 = 1".into(), vec![vec![a], vec![mid], vec![b]], vec![l(d - 1), l(d), l(d + 1)]),
            3 => ("odd, dim2 = 3".into(), vec![vec![a], vec![mid, b]], vec![l(d - 1), rost("C0(q)", 1, d)]),
            _ => ("odd, dim2 > 3".into(), vec![vec![a, mid, b]], vec![kernel("Mker", Symbol::zero())]),
        }
    } else {
        match k2 {
            0 => (
                "even, dim2 = 0".into(),
                vec![vec![a], vec![u], vec![lo], vec![b]],
                vec![l(d - 1), l(d), l(d), l(d + 1)],
            ),
            2 => (
                "even, dim2 = 2".into(),
                vec![vec![a], vec![u, lo], vec![b]],
                vec![l(d - 1), rost("disc(q)", 0, d), l(d + 1)],
            ),
            4 => {
                let k1 = p.kahn(1).ok_or_else(|| Error::MissingData("kahn_dims[1] is required".into()))?;
                if k1 == 0 {
                    (
                        "even, dim2 = 4, dim1 = 0".into(),
                        vec![vec![a, u], vec![lo, b]],
                        vec![rost("C(q)", 1, d - 1), rost("C(q)", 1, d)],
                    )
                } else {
                    ("even, dim2 = 4, dim1 > 0".into(), vec![vec![a, u, lo, b]], vec![kernel("Q'", alpha.clone())])
                }
            }
            _ => ("even, dim2 > 4".into(), vec![vec![a, u, lo, b]], vec![kernel("Mker", Symbol::zero())]),
        }
    };
    let firsts: Vec<Cell> = comps.iter().map(|c| c[0]).collect();
    let mut diagram = MDTDiagram::new(Flavor::Morava(2), dim, comps)?.with_anisotropic(p.anisotropic);
    for (c, lab) in firsts.into_iter().zip(labels) {
        diagram.set_label(c, lab)?;
    }
    let order: Vec<Cell> = if p.dim % 2 == 1 { vec![a, mid, b] } else { vec![a, u, lo, b] };
    let mut glyph = String::from("•");
    for w in order.windows(2) {
        glyph.push(if diagram.component_of(w[0]) == diagram.component_of(w[1]) { '–' } else { ' ' });
        glyph.push('•');
    }
    Ok(K2Classification { row, glyph, diagram })
}

/// The Morava diagram of the small Kahn decomposition, labelled summand by summand.
pub fn small_kahn_diagram(p: &FormProfile, n: u32) -> Result<MDTDiagram> {
    let layout = small_kahn_layout(p, n)?;
    let dim = p.dim - 2;
    let d = dim as i64 / 2;
    let even = dim.is_multiple_of(2);
    let to_cell = |(pos, lower): (i64, bool)| match (even && pos == d, lower) {
        (true, false) => Cell::upper(pos),
        (true, true) => Cell::lower(pos),
        _ => Cell::plain(pos),
    };
    let comps: Vec<Vec<Cell>> = layout.iter().map(|(_, cells)| cells.iter().copied().map(to_cell).collect()).collect();
    let mut m = MDTDiagram::new(Flavor::Morava(n), dim, comps)?.with_anisotropic(p.anisotropic);
    for (kind, cells) in layout {
        let first = to_cell(cells[0]);
        m.set_label(first, MotiveExpr::single(TwistMode::Periodic(n), kind, cells[0].0))?;
    }
    m.canonicalize_middles();
    Ok(m)
}

/// The twist `s` with `Mker Q' ≅ Mker Q (s)`, for forms declared similar
/// modulo `I^{n+2}`.
pub fn kernel_shift_equiv(p1: &FormProfile, p2: &FormProfile, n: u32, declared_similar: bool) -> Result<Option<i64>> {
    let floor = 1u64 << n;
    if (p1.dim as u64) < floor || (p2.dim as u64) < floor {
        return Err(Error::InvalidArgument(format!("both dimensions must be at least 2^{n}")));
    }
    if p1.dim % 2 != p2.dim % 2 {
        return Err(Error::Parity(format!("dimensions {} and {} differ in parity", p1.dim, p2.dim)));
    }
    if !declared_similar {
        return Ok(None);
    }
    Ok(Some((p2.dim as i64 - p1.dim as i64) / 2))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentJson {
    cells: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<MotiveExpr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagramJson {
    flavor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
    dim: u32,
    #[serde(default = "default_true")]
    anisotropic: bool,
    #[serde(default)]
    cells: Vec<Cell>,
    components: Vec<ComponentJson>,
    #[serde(default)]
    complementary_tates: Vec<i64>,
}

fn default_true() -> bool {
    true
}

impl From<MDTDiagram> for DiagramJson {
    fn from(m: MDTDiagram) -> Self {
        let (flavor, n) = match m.flavor {
            Flavor::Chow => ("chow".to_string(), None),
            Flavor::Morava(n) => ("morava".to_string(), Some(n)),
        };
        DiagramJson {
            flavor,
            n,
            dim: m.dim,
            anisotropic: m.anisotropic,
            cells: m.cells,
            components: m
                .components
                .into_iter()
                .map(|c| ComponentJson { cells: c.cells.iter().map(ToString::to_string).collect(), label: c.label })
                .collect(),
            complementary_tates: m.complementary_tates,
        }
    }
}

impl TryFrom<DiagramJson> for MDTDiagram {
    type Error = Error;

    fn try_from(j: DiagramJson) -> Result<Self> {
        let flavor = match (j.flavor.as_str(), j.n) {
            ("chow", None) => Flavor::Chow,
            ("morava", Some(n)) => Flavor::Morava(n),
            ("morava", None) => return Err(Error::MissingData("morava diagrams need n".into())),
            (f, _) => return Err(Error::InvalidArgument(format!("unknown flavor {f:?}"))),
        };
        let mut comps = Vec::new();
        let mut labels = Vec::new();
        for c in j.components {
            let cells = c.cells.iter().map(|s| Cell::parse(s)).collect::<Result<Vec<_>>>()?;
            if let (Some(first), Some(l)) = (cells.first(), c.label) {
                labels.push((*first, l));
            }
            comps.push(cells);
        }
        let mut m = MDTDiagram::new(flavor, j.dim, comps)?.with_anisotropic(j.anisotropic);
        if !j.cells.is_empty() && j.cells != m.cells {
            return Err(Error::InvalidArgument("listed cells disagree with the flavor and dimension".into()));
        }
        if !j.complementary_tates.is_empty() && j.complementary_tates != m.complementary_tates {
            return Err(Error::InvalidArgument("listed grey dots disagree with the window".into()));
        }
        for (c, l) in labels {
            m.set_label(c, l)?;
        }
        Ok(m)
    }
}

impl fmt::Display for MDTDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_ascii(None))
    }
}
