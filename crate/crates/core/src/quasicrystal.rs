//! Planar lattices and their cut-and-project sets.
//!
//! For the session constant α the lattice
//! `Γ = {(n(1+α) − m, m − nα)}` has determinant one and dual
//! `Γ* = {(k + mα, k + mα + m)}`. The primal set `Λ(Γ, I)` keeps the first
//! coordinate of every lattice point with second coordinate in `I`; the
//! dual set `Λ*(Γ, S)` swaps the roles. The dual set also decomposes into
//! blocks `Λ_n = (S ∩ (nα + ℤ)) + n`, which gives the enumeration used by the
//! condition checks.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::parse;
use crate::qnum::{Alpha, AlphaPoly, QNum};
use crate::spectra::{Interval, Spectrum};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vec2 {
    pub x: QNum,
    pub y: QNum,
}

impl Vec2 {
    pub fn new(x: QNum, y: QNum) -> Self {
        Vec2 { x, y }
    }

    pub fn project(&self, p: Projection) -> &QNum {
        match p {
            Projection::First => &self.x,
            Projection::Second => &self.y,
        }
    }
}

/// `⟨a, b⟩` as a formal polynomial in α.
pub fn inner(a: &Vec2, b: &Vec2) -> AlphaPoly {
    a.x.mul_formal(&b.x) + a.y.mul_formal(&b.y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    /// `p₁(x, y) = x`
    First,
    /// `p₂(x, y) = y`
    Second,
}

impl Projection {
    pub fn other(self) -> Projection {
        match self {
            Projection::First => Projection::Second,
            Projection::Second => Projection::First,
        }
    }
}

/// Rank-2 lattice `{n·b₁ + m·b₂}`.
#[derive(Clone, Debug)]
pub struct Lattice2 {
    alpha: Alpha,
    basis: [Vec2; 2],
    det: QNum,
}

fn two_by_two_det(alpha: &Alpha, b1: &Vec2, b2: &Vec2) -> Result<QNum> {
    let poly = b1.x.mul_formal(&b2.y) - b1.y.mul_formal(&b2.x);
    poly.reduce(alpha).ok_or_else(|| Error::NotRepresentable(format!("determinant {poly:?}")))
}

impl Lattice2 {
    pub fn new(alpha: Alpha, b1: Vec2, b2: Vec2) -> Result<Lattice2> {
        let det = two_by_two_det(&alpha, &b1, &b2)?;
        if alpha.sign(&det)?.is_eq() {
            return Err(Error::InvalidInput("lattice basis is degenerate".into()));
        }
        Ok(Lattice2 { alpha, basis: [b1, b2], det })
    }

    /// `Γ` generated by `(1+α, −α)` (coordinate `n`) and `(−1, 1)`
    /// (coordinate `m`).
    pub fn gamma(alpha: &Alpha) -> Lattice2 {
        let b1 = Vec2::new(QNum::new(BigRational::one(), BigInt::one()), QNum::alpha_multiple(-1));
        let b2 = Vec2::new(QNum::int(-1), QNum::int(1));
        Lattice2 { alpha: alpha.clone(), basis: [b1, b2], det: QNum::int(1) }
    }

    /// `ℤ²`.
    pub fn integer(alpha: &Alpha) -> Lattice2 {
        Lattice2 {
            alpha: alpha.clone(),
            basis: [Vec2::new(QNum::int(1), QNum::zero()), Vec2::new(QNum::zero(), QNum::int(1))],
            det: QNum::int(1),
        }
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn basis(&self) -> &[Vec2; 2] {
        &self.basis
    }

    pub fn determinant(&self) -> &QNum {
        &self.det
    }

    /// Basis `w₁, w₂` with `⟨b_i, w_j⟩ = δ_ij`. Needs a rational determinant.
    pub fn dual(&self) -> Result<Lattice2> {
        let det = self
            .det
            .as_rational()
            .ok_or_else(|| Error::NotRepresentable(format!("1 / det with det = {}", self.det)))?;
        let inv = det.recip();
        let scale = |q: &QNum| q.scale_rational(&inv).ok_or_else(|| Error::NotRepresentable(format!("{q} / {det}")));
        let [b1, b2] = &self.basis;
        let w1 = Vec2::new(scale(&b2.y)?, scale(&-&b2.x)?);
        let w2 = Vec2::new(scale(&-&b1.y)?, scale(&b1.x)?);
        Lattice2::new(self.alpha.clone(), w1, w2)
    }

    pub fn point(&self, n: i64, m: i64) -> Vec2 {
        let (n, m) = (BigInt::from(n), BigInt::from(m));
        let [b1, b2] = &self.basis;
        Vec2::new(b1.x.scale_int(&n) + b2.x.scale_int(&m), b1.y.scale_int(&n) + b2.y.scale_int(&m))
    }

    /// Integer coordinates of `p` in this basis, or an error when `p` is not
    /// a lattice point.
    pub fn coordinates(&self, p: &Vec2) -> Result<(BigInt, BigInt)> {
        let dual = self.dual()?;
        let coord = |w: &Vec2| -> Result<BigInt> {
            let poly = inner(p, w);
            let c = match poly.formal_integer() {
                Some(c) => Some(c),
                None => poly
                    .reduce(&self.alpha)
                    .and_then(|q| q.as_rational().filter(|r| r.is_integer()).map(|r| r.to_integer())),
            };
            c.ok_or_else(|| Error::NotRepresentable(format!("({}, {}) is not a lattice point", p.x, p.y)))
        };
        Ok((coord(&dual.basis[0])?, coord(&dual.basis[1])?))
    }

    /// Equality as point sets: each basis expresses the other with a
    /// unimodular integer matrix.
    pub fn same_lattice(&self, other: &Lattice2) -> Result<bool> {
        for b in &other.basis {
            if self.coordinates(b).is_err() {
                return Ok(false);
            }
        }
        let (a, b) = self.coordinates(&other.basis[0])?;
        let (c, d) = self.coordinates(&other.basis[1])?;
        let det = a * d - b * c;
        Ok(det == BigInt::one() || det == -BigInt::one())
    }
}

/// Inclusive coordinate ranges `n ∈ [n.0, n.1]`, `m ∈ [m.0, m.1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoordBox {
    pub n: (i64, i64),
    pub m: (i64, i64),
}

/// Coordinates far beyond anything enumerable: marks an unconstrained side.
pub const UNBOUNDED: i64 = 1 << 40;

impl CoordBox {
    pub fn square(r: i64) -> CoordBox {
        CoordBox { n: (-r, r), m: (-r, r) }
    }

    pub fn contains(&self, n: i64, m: i64) -> bool {
        self.n.0 <= n && n <= self.n.1 && self.m.0 <= m && m <= self.m.1
    }

    fn is_empty(&self) -> bool {
        self.n.0 > self.n.1 || self.m.0 > self.m.1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeHit {
    pub n: i64,
    pub m: i64,
    pub point: Vec2,
}

/// `⌊x / c⌋` for a nonzero rational `c`, exact.
fn floor_div(alpha: &Alpha, x: &QNum, c: &BigRational) -> Result<BigInt> {
    if c.is_one() {
        return alpha.floor(x);
    }
    let (x, c) = if c < &BigRational::zero() { (-x, -c) } else { (x.clone(), c.clone()) };
    let guess = alpha.to_f64(&x) / c.to_f64().unwrap_or(f64::NAN);
    let mut z = if guess.is_finite() && guess.abs() < 1e15 {
        BigInt::from(guess.floor() as i64)
    } else {
        ((x.u() + BigRational::from_integer(x.v().clone()) * alpha.high_precision()) / &c).floor().to_integer()
    };
    let times = |z: &BigInt| QNum::rational(BigRational::from_integer(z.clone()) * &c);
    loop {
        if alpha.lt(&x, &times(&z))? {
            z -= 1;
        } else if !alpha.lt(&x, &times(&(&z + 1)))? {
            z += 1;
        } else {
            return Ok(z);
        }
    }
}

fn clamp_i64(z: BigInt, lo: i64, hi: i64) -> i64 {
    match z.to_i64() {
        Some(v) => v.clamp(lo, hi),
        None if z < BigInt::zero() => lo,
        None => hi,
    }
}

/// All lattice points `γ` in the coordinate box with `p(γ) ∈ [lo, hi)`.
///
/// When one generator has a rational nonzero projection the other
/// coordinate is scanned and the admissible range solved exactly; otherwise
/// the box is enumerated point by point.
pub fn points_in_strip(
    lattice: &Lattice2,
    proj: Projection,
    lo: &QNum,
    hi: &QNum,
    bx: CoordBox,
) -> Result<Vec<LatticeHit>> {
    let alpha = &lattice.alpha;
    let mut hits = Vec::new();
    if bx.is_empty() || !alpha.lt(lo, hi)? {
        return Ok(hits);
    }
    let c1 = lattice.basis[0].project(proj).clone();
    let c2 = lattice.basis[1].project(proj).clone();
    // scan over `outer`, solve for `inner` with rational step `c`
    let plan = match (c2.as_rational(), c1.as_rational()) {
        (Some(c), _) if !c.is_zero() => Some((false, c.clone(), c1.clone(), bx.n, bx.m)),
        (_, Some(c)) if !c.is_zero() => Some((true, c.clone(), c2.clone(), bx.m, bx.n)),
        _ => None,
    };
    let Some((swapped, step, outer_coef, outer_range, inner_range)) = plan else {
        let size = (bx.n.1 - bx.n.0 + 1) as i128 * (bx.m.1 - bx.m.0 + 1) as i128;
        if size > 10_000_000 {
            return Err(Error::InvalidInput(format!("brute-force strip scan over {size} points refused")));
        }
        for n in bx.n.0..=bx.n.1 {
            for m in bx.m.0..=bx.m.1 {
                let p = lattice.point(n, m);
                let v = p.project(proj);
                if alpha.le(lo, v)? && alpha.lt(v, hi)? {
                    hits.push(LatticeHit { n, m, point: p });
                }
            }
        }
        return Ok(hits);
    };
    let positive = step > BigRational::zero();
    for outer in outer_range.0..=outer_range.1 {
        let base = outer_coef.scale_int(&BigInt::from(outer));
        let from_lo = lo - &base;
        let from_hi = hi - &base;
        // inner·step ∈ [from_lo, from_hi)
        let (first, last) = if positive {
            let f = -floor_div(alpha, &-&from_lo, &step)?; // ceil(from_lo / step)
            let l = -floor_div(alpha, &-&from_hi, &step)? - 1; // ceil(from_hi / step) - 1
            (f, l)
        } else {
            let l = floor_div(alpha, &from_lo, &step)?;
            let f = floor_div(alpha, &from_hi, &step)? + 1;
            (f, l)
        };
        let first = clamp_i64(first, inner_range.0, inner_range.1 + 1);
        let last = clamp_i64(last, inner_range.0 - 1, inner_range.1);
        for inner in first..=last {
            let (n, m) = if swapped { (inner, outer) } else { (outer, inner) };
            hits.push(LatticeHit { n, m, point: lattice.point(n, m) });
        }
    }
    Ok(hits)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub value: QNum,
    pub approx: f64,
    /// Block index `n` for partition enumerations.
    pub block: Option<i64>,
    /// Lattice coordinates for cut-and-project outputs.
    pub coords: Option<(i64, i64)>,
}

/// Block `Λ_n` occupying indices `[start, end) = [s_{n−1}, s_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub n: i64,
    pub start: i64,
    pub end: i64,
}

impl Block {
    pub fn len(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Where the index `j = 0` sits in a partition enumeration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Anchor {
    /// `s_{−1} = 0`: index 0 is the first node of block 0.
    #[default]
    Origin,
    /// `s_{n_lo − 1} = 0` at the start of the enumerated window.
    WindowStart,
}

/// Indexed point set with optional block structure.
#[derive(Clone, Debug)]
pub struct NodeSet {
    alpha: Alpha,
    first_index: i64,
    nodes: Vec<Node>,
    blocks: Vec<Block>,
}

impl NodeSet {
    /// Flat set from values, indexed `0..len` in the given order.
    pub fn flat(alpha: Alpha, nodes: Vec<Node>) -> NodeSet {
        NodeSet { alpha, first_index: 0, nodes, blocks: Vec::new() }
    }

    pub fn from_values(alpha: Alpha, values: Vec<QNum>) -> NodeSet {
        let nodes = values
            .into_iter()
            .map(|value| Node { approx: alpha.to_f64(&value), value, block: None, coords: None })
            .collect();
        NodeSet::flat(alpha, nodes)
    }

    /// The same nodes re-indexed so that `nodes()[0]` has index `j0`.
    pub fn reindexed(mut self, j0: i64) -> NodeSet {
        let shift = j0 - self.first_index;
        self.first_index = j0;
        for b in &mut self.blocks {
            b.start += shift;
            b.end += shift;
        }
        self
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Enumeration index of `nodes()[i]`.
    pub fn index_of(&self, i: usize) -> i64 {
        self.first_index + i as i64
    }

    /// Node with enumeration index `j`.
    pub fn get(&self, j: i64) -> Option<&Node> {
        let i = j.checked_sub(self.first_index)?;
        usize::try_from(i).ok().and_then(|i| self.nodes.get(i))
    }

    pub fn block(&self, n: i64) -> Option<&Block> {
        let first = self.blocks.first()?;
        let i = usize::try_from(n.checked_sub(first.n)?).ok()?;
        self.blocks.get(i)
    }

    pub fn approx_values(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.approx).collect()
    }

    /// Ascending by value, exact.
    pub fn sorted(&self) -> Result<NodeSet> {
        let mut nodes = self.nodes.clone();
        sort_nodes(&self.alpha, &mut nodes)?;
        for n in &mut nodes {
            n.block = None;
        }
        Ok(NodeSet::flat(self.alpha.clone(), nodes))
    }

    /// Nodes with value in the closed window `[lo, hi]`, sorted, flat.
    pub fn restrict_values(&self, lo: &QNum, hi: &QNum) -> Result<NodeSet> {
        let mut kept = Vec::new();
        for n in &self.nodes {
            if self.alpha.le(lo, &n.value)? && self.alpha.le(&n.value, hi)? {
                kept.push(n.clone());
            }
        }
        let mut out = NodeSet::flat(self.alpha.clone(), kept);
        sort_nodes(&out.alpha, &mut out.nodes)?;
        for n in &mut out.nodes {
            n.block = None;
        }
        Ok(out)
    }

    /// A copy with one extra node appended (flat, re-sorted).
    pub fn with_added(&self, value: QNum) -> Result<NodeSet> {
        let mut nodes = self.nodes.clone();
        nodes.push(Node { approx: self.alpha.to_f64(&value), value, block: None, coords: None });
        sort_nodes(&self.alpha, &mut nodes)?;
        Ok(NodeSet::flat(self.alpha.clone(), nodes))
    }

    /// A copy without the node at position `i` (flat).
    pub fn without(&self, i: usize) -> NodeSet {
        let mut nodes = self.nodes.clone();
        nodes.remove(i);
        for n in &mut nodes {
            n.block = None;
        }
        NodeSet::flat(self.alpha.clone(), nodes)
    }

    /// CSV export, header `j,n,u,v,float64_value`; `comments` become leading
    /// `#` lines.
    pub fn to_csv(&self, comments: &[String]) -> Result<String> {
        let mut out = String::new();
        for c in comments {
            for line in c.lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["j", "n", "u", "v", "float64_value"])?;
        for (i, node) in self.nodes.iter().enumerate() {
            w.write_record([
                self.index_of(i).to_string(),
                node.block.map(|n| n.to_string()).unwrap_or_default(),
                parse::rational_to_string(node.value.u()),
                node.value.v().to_string(),
                format!("{:?}", node.approx),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?);
        Ok(out)
    }

    /// Parses the CSV export. Exact columns are authoritative; the float
    /// column must parse but is otherwise ignored.
    pub fn from_csv(alpha: &Alpha, text: &str) -> Result<NodeSet> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["j", "n", "u", "v", "float64_value"] {
            return Err(Error::Parse(format!("unexpected header {header:?}")));
        }
        let mut nodes = Vec::new();
        let mut first_index = None;
        let mut blocked: Option<bool> = None;
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 5 {
                return Err(Error::Parse(format!("expected 5 fields, got {}", rec.len())));
            }
            let j: i64 = rec[0].parse().map_err(|_| Error::Parse(format!("bad index {:?}", &rec[0])))?;
            let expected = first_index.map(|f: i64| f + nodes.len() as i64);
            match expected {
                None => first_index = Some(j),
                Some(e) if e == j => {}
                Some(e) => return Err(Error::Parse(format!("index {j} out of sequence, expected {e}"))),
            }
            let block = if rec[1].is_empty() {
                None
            } else {
                Some(rec[1].parse::<i64>().map_err(|_| Error::Parse(format!("bad block {:?}", &rec[1])))?)
            };
            if *blocked.get_or_insert(block.is_some()) != block.is_some() {
                return Err(Error::Parse("block column must be filled on every row or none".into()));
            }
            let value = QNum::new(parse::rational(&rec[2])?, parse::integer(&rec[3])?);
            let _: f64 = rec[4].parse().map_err(|_| Error::Parse(format!("bad float {:?}", &rec[4])))?;
            nodes.push(Node { approx: alpha.to_f64(&value), value, block, coords: None });
        }
        let first_index = first_index.unwrap_or(0);
        if first_index.checked_add(nodes.len() as i64).is_none() {
            return Err(Error::Parse("index range overflows".into()));
        }
        let mut blocks: Vec<Block> = Vec::new();
        for (i, node) in nodes.iter().enumerate() {
            let Some(n) = node.block else { break };
            let j = first_index + i as i64;
            match blocks.last_mut() {
                Some(b) if b.n == n => b.end = j + 1,
                Some(b) if b.n < n => {
                    if n - b.n > 1_000_000 {
                        return Err(Error::Parse("block gap too large".into()));
                    }
                    let end = b.end;
                    for gap in b.n + 1..n {
                        blocks.push(Block { n: gap, start: end, end });
                    }
                    blocks.push(Block { n, start: j, end: j + 1 });
                }
                Some(_) => return Err(Error::Parse(format!("block {n} out of order"))),
                None => blocks.push(Block { n, start: j, end: j + 1 }),
            }
        }
        Ok(NodeSet { alpha: alpha.clone(), first_index, nodes, blocks })
    }
}

/// Exact ascending sort; floats decide when they are far apart.
pub fn sort_nodes(alpha: &Alpha, nodes: &mut [Node]) -> Result<()> {
    let mut err = None;
    nodes.sort_by(|a, b| {
        let gap = (a.approx - b.approx).abs();
        if gap.is_finite() && gap > 1e-9 * (1.0 + a.approx.abs().max(b.approx.abs())) {
            return a.approx.total_cmp(&b.approx);
        }
        match alpha.cmp(&a.value, &b.value) {
            Ok(o) => o,
            Err(e) => {
                err.get_or_insert(e);
                std::cmp::Ordering::Equal
            }
        }
    });
    err.map_or(Ok(()), Err)
}

fn hits_to_nodeset(alpha: &Alpha, hits: Vec<LatticeHit>, value_proj: Projection) -> Result<NodeSet> {
    let mut nodes: Vec<Node> = hits
        .into_iter()
        .map(|h| {
            let value = h.point.project(value_proj).clone();
            Node { approx: alpha.to_f64(&value), value, block: None, coords: Some((h.n, h.m)) }
        })
        .collect();
    sort_nodes(alpha, &mut nodes)?;
    Ok(NodeSet::flat(alpha.clone(), nodes))
}

/// `Λ(L, I) = {p₁(γ) : p₂(γ) ∈ I}` over the coordinate box, ascending.
pub fn cut_project_primal(lattice: &Lattice2, window: &Interval, bx: CoordBox) -> Result<NodeSet> {
    let hits = points_in_strip(lattice, Projection::Second, window.lo(), window.hi(), bx)?;
    hits_to_nodeset(&lattice.alpha, hits, Projection::First)
}

/// `Λ*(L, S) = {p₂(γ*) : γ* ∈ L*, p₁(γ*) ∈ S}`. The box indexes
/// coordinates in the dual basis.
pub fn cut_project_dual(lattice: &Lattice2, spectrum: &Spectrum, bx: CoordBox) -> Result<NodeSet> {
    let dual = lattice.dual()?;
    let mut hits = Vec::new();
    for band in spectrum.bands() {
        hits.extend(points_in_strip(&dual, Projection::First, band.lo(), band.hi(), bx)?);
    }
    hits_to_nodeset(&lattice.alpha, hits, Projection::Second)
}

/// `Λ(Γ, I) ∩ [−R, R]` for `I = [0, mes S)`.
pub fn primal_window(spectrum: &Spectrum, radius: f64) -> Result<NodeSet> {
    let alpha = spectrum.alpha();
    let window = Interval::new(alpha, QNum::zero(), spectrum.measure().clone())?;
    primal_window_in(alpha, &window, radius)
}

/// `Λ(Γ, I) ∩ [−R, R]` for any window. Uses `p₁ + p₂ = n` on `Γ`.
pub fn primal_window_in(alpha: &Alpha, window: &Interval, radius: f64) -> Result<NodeSet> {
    let gamma = Lattice2::gamma(alpha);
    let r = radius.ceil() as i64;
    let bottom = alpha.to_f64(window.lo()).floor() as i64;
    let top = alpha.to_f64(window.hi()).ceil() as i64;
    let bx = CoordBox { n: (-r + bottom - 1, r + top + 1), m: (-UNBOUNDED, UNBOUNDED) };
    let all = cut_project_primal(&gamma, window, bx)?;
    let (lo, hi) = radius_bounds(radius)?;
    all.restrict_values(&lo, &hi)
}

/// `Λ*(Γ, S) ∩ [−R, R]`. Uses `p₂ − p₁ = m` on `Γ*`.
pub fn dual_window(spectrum: &Spectrum, radius: f64) -> Result<NodeSet> {
    let alpha = spectrum.alpha();
    let gamma = Lattice2::gamma(alpha);
    let lower = alpha.to_f64(spectrum.lower()).floor() as i64;
    let upper = alpha.to_f64(spectrum.upper()).ceil() as i64;
    let r = radius.ceil() as i64;
    let bx = CoordBox { n: (-UNBOUNDED, UNBOUNDED), m: (-r - upper - 1, r - lower + 1) };
    let all = cut_project_dual(&gamma, spectrum, bx)?;
    let (lo, hi) = radius_bounds(radius)?;
    all.restrict_values(&lo, &hi)
}

fn radius_bounds(radius: f64) -> Result<(QNum, QNum)> {
    let r =
        BigRational::from_float(radius).ok_or_else(|| Error::InvalidInput(format!("radius {radius} is not finite")))?;
    Ok((QNum::rational(-r.clone()), QNum::rational(r)))
}

/// `#Λ_n` from the band formula `Σ (⌈b − nα⌉ − ⌈a − nα⌉)`.
pub fn block_count(spectrum: &Spectrum, n: i64) -> Result<u64> {
    let alpha = spectrum.alpha();
    let shift = QNum::alpha_multiple(n);
    let mut count = BigInt::zero();
    for b in spectrum.bands() {
        count += alpha.ceil(&(b.hi() - &shift))? - alpha.ceil(&(b.lo() - &shift))?;
    }
    count.to_u64().ok_or_else(|| Error::InvalidInput("negative block count".into()))
}

fn block_values(spectrum: &Spectrum, n: i64) -> Result<Vec<QNum>> {
    let alpha = spectrum.alpha();
    let shift = QNum::alpha_multiple(n);
    let nn = BigInt::from(n);
    let mut out = Vec::new();
    for b in spectrum.bands() {
        let mut k = alpha.ceil(&(b.lo() - &shift))?;
        let end = alpha.ceil(&(b.hi() - &shift))?;
        while k < end {
            // nα + k + n
            out.push(QNum::new(BigRational::from_integer(&k + &nn), nn.clone()));
            k += 1;
        }
    }
    Ok(out)
}

/// `s_{n_lo − 1}` under the given anchor.
fn anchor_index(spectrum: &Spectrum, n_lo: i64, anchor: Anchor) -> Result<i64> {
    match anchor {
        Anchor::WindowStart => Ok(0),
        Anchor::Origin if n_lo <= 0 => {
            let counts: Result<Vec<u64>> = (n_lo..0).into_par_iter().map(|n| block_count(spectrum, n)).collect();
            Ok(-(counts?.iter().sum::<u64>() as i64))
        }
        Anchor::Origin => {
            let counts: Result<Vec<u64>> = (0..n_lo).into_par_iter().map(|n| block_count(spectrum, n)).collect();
            Ok(counts?.iter().sum::<u64>() as i64)
        }
    }
}

/// `Λ*(Γ, S) = ⋃ Λ_n`, `Λ_n = (S ∩ (nα + ℤ)) + n`, concatenated in
/// increasing `n`, ascending within each block.
pub fn partition_enumerate(spectrum: &Spectrum, n_range: (i64, i64), anchor: Anchor) -> Result<NodeSet> {
    let alpha = spectrum.alpha();
    let (n_lo, n_hi) = n_range;
    if n_lo > n_hi {
        return Err(Error::InvalidInput(format!("empty block range {n_lo}:{n_hi}")));
    }
    let per_block: Result<Vec<Vec<QNum>>> = (n_lo..=n_hi).into_par_iter().map(|n| block_values(spectrum, n)).collect();
    let per_block = per_block?;
    let first_index = anchor_index(spectrum, n_lo, anchor)?;
    let mut nodes = Vec::with_capacity(per_block.iter().map(Vec::len).sum());
    let mut blocks = Vec::with_capacity(per_block.len());
    let mut s = first_index;
    for (values, n) in per_block.into_iter().zip(n_lo..=n_hi) {
        let start = s;
        for value in values {
            nodes.push(Node { approx: alpha.to_f64(&value), value, block: Some(n), coords: None });
            s += 1;
        }
        blocks.push(Block { n, start, end: s });
    }
    Ok(NodeSet { alpha: alpha.clone(), first_index, nodes, blocks })
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct PartitionReport {
    pub equal: bool,
    pub cut_project_count: usize,
    pub partition_count: usize,
    /// Partition nodes whose dual-lattice coordinates fall inside the box.
    pub partition_in_box: usize,
    pub first_discrepancy: Option<String>,
}

/// Compares `Λ*(Γ, S)` from the lattice with the block partition over the
/// same truncation, as sets with exact equality.
///
/// Block `n` of the partition is the dual-lattice coordinate `m`; the
/// partition is enumerated over the box's `m`-range and filtered to the
/// box after mapping each node back to lattice coordinates.
pub fn verify_partition(lattice: &Lattice2, spectrum: &Spectrum, bx: CoordBox) -> Result<PartitionReport> {
    let from_lattice = cut_project_dual(lattice, spectrum, bx)?;
    let dual = lattice.dual()?;
    let mut lattice_map: BTreeMap<(i64, i64), &QNum> = BTreeMap::new();
    for node in from_lattice.nodes() {
        let c = node.coords.expect("cut-and-project nodes carry coordinates");
        if lattice_map.insert(c, &node.value).is_some() {
            return Ok(report_mismatch(&from_lattice, 0, 0, format!("lattice point {c:?} enumerated twice")));
        }
    }
    if bx.is_empty() {
        return Ok(PartitionReport {
            equal: from_lattice.is_empty(),
            cut_project_count: from_lattice.len(),
            partition_count: 0,
            partition_in_box: 0,
            first_discrepancy: None,
        });
    }
    let parts = partition_enumerate(spectrum, bx.m, Anchor::WindowStart)?;
    let mut in_box = 0usize;
    for node in parts.nodes() {
        let n = node.block.expect("partition nodes carry block indices");
        // Γ* point (λ − n, λ)
        let point = Vec2::new(node.value.add_int(&BigInt::from(-n)), node.value.clone());
        let (c1, c2) = dual.coordinates(&point)?;
        let (c1, c2) = match (c1.to_i64(), c2.to_i64()) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        if c2 != n {
            return Ok(report_mismatch(
                &from_lattice,
                parts.len(),
                in_box,
                format!("block {n} maps to lattice coordinate m = {c2}"),
            ));
        }
        if !bx.contains(c1, c2) {
            continue;
        }
        in_box += 1;
        match lattice_map.get(&(c1, c2)) {
            Some(v) if **v == node.value => {}
            Some(v) => {
                return Ok(report_mismatch(
                    &from_lattice,
                    parts.len(),
                    in_box,
                    format!("({c1}, {c2}): lattice {v} vs partition {}", node.value),
                ));
            }
            None => {
                return Ok(report_mismatch(
                    &from_lattice,
                    parts.len(),
                    in_box,
                    format!("partition node {} at ({c1}, {c2}) missing from lattice scan", node.value),
                ));
            }
        }
    }
    let equal = in_box == lattice_map.len();
    Ok(PartitionReport {
        equal,
        cut_project_count: from_lattice.len(),
        partition_count: parts.len(),
        partition_in_box: in_box,
        first_discrepancy: (!equal)
            .then(|| format!("{} lattice points have no partition counterpart", lattice_map.len() - in_box)),
    })
}

fn report_mismatch(lattice: &NodeSet, parts: usize, in_box: usize, why: String) -> PartitionReport {
    PartitionReport {
        equal: false,
        cut_project_count: lattice.len(),
        partition_count: parts,
        partition_in_box: in_box,
        first_discrepancy: Some(why),
    }
}
