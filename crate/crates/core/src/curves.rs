//! Curves on the universal cover of the rank-3 torus.
//!
//! The plane carries three families of lines: vertical (`x ∈ ℤ`), diagonal
//! (`x + y ∈ ℤ`) and horizontal (`y ∈ ℤ`). They cut the plane into triangles
//! `L(i, j)` with corners `(i, j), (i+1, j), (i, j+1)` and `U(i, j)` with
//! corners `(i+1, j), (i+1, j+1), (i, j+1)`. A labeling assigns a vertex of
//! the quiver to each family, so the ordered list of lines a curve crosses
//! spells a word in the generators.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coxeter::{is_reflection, Reflection, Word};
use crate::error::{Error, Result};
use crate::fork::LinearOrdering;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A point with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: BigRational,
    pub y: BigRational,
}

impl Point {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        Self { x, y }
    }

    pub fn int(x: i64, y: i64) -> Self {
        Self::new(rat(x), rat(y))
    }

    pub fn is_lattice(&self) -> bool {
        self.x.is_integer() && self.y.is_integer()
    }

    fn lerp(&self, other: &Point, t: &BigRational) -> Point {
        Point::new(
            &self.x + (&other.x - &self.x) * t,
            &self.y + (&other.y - &self.y) * t,
        )
    }

    fn to_f64(&self) -> (f64, f64) {
        (
            self.x.to_f64().unwrap_or(f64::NAN),
            self.y.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x.to_string(), self.y.to_string()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [x, y] = <[String; 2]>::deserialize(d)?;
        let parse = |s: &str| BigRational::from_str(s.trim()).map_err(serde::de::Error::custom);
        Ok(Point::new(parse(&x)?, parse(&y)?))
    }
}

/// A piecewise-linear curve.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point>,
}

impl Polyline {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn segment(a: Point, b: Point) -> Self {
        Self::new(vec![a, b])
    }

    pub fn reversed(&self) -> Polyline {
        Polyline::new(self.points.iter().rev().cloned().collect())
    }

    pub fn start(&self) -> &Point {
        &self.points[0]
    }

    pub fn end(&self) -> &Point {
        self.points.last().expect("non-empty polyline")
    }

    pub fn translated(&self, dx: i64, dy: i64) -> Polyline {
        let (dx, dy) = (rat(dx), rat(dy));
        Polyline::new(
            self.points
                .iter()
                .map(|p| Point::new(&p.x + &dx, &p.y + &dy))
                .collect(),
        )
    }

    /// Endpoints on ℤ², at least two points, no other lattice points.
    pub fn check_shape(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::DegenerateCrossing("polyline needs two points".into()));
        }
        if !self.start().is_lattice() || !self.end().is_lattice() {
            return Err(Error::DegenerateCrossing(
                "polyline endpoints must be lattice points".into(),
            ));
        }
        if let Some(p) = self.points[1..self.points.len() - 1].iter().find(|p| p.is_lattice()) {
            return Err(Error::DegenerateCrossing(format!(
                "interior vertex {p} is a lattice point"
            )));
        }
        Ok(())
    }
}

/// The three line families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `x ∈ ℤ`
    Vertical,
    /// `x + y ∈ ℤ`
    Diagonal,
    /// `y ∈ ℤ`
    Horizontal,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Vertical, Family::Diagonal, Family::Horizontal];

    fn index(self) -> usize {
        match self {
            Family::Vertical => 0,
            Family::Diagonal => 1,
            Family::Horizontal => 2,
        }
    }

    /// The linear functional whose integer level sets are this family.
    fn level(self, p: &Point) -> BigRational {
        match self {
            Family::Vertical => p.x.clone(),
            Family::Diagonal => &p.x + &p.y,
            Family::Horizontal => p.y.clone(),
        }
    }
}

/// Vertex labels of the vertical, diagonal and horizontal families, stored
/// 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FamilyLabeling {
    sigma: [usize; 3],
}

impl FamilyLabeling {
    /// `sigma` lists the vertices for vertical, diagonal, horizontal lines.
    pub fn new(sigma: [usize; 3]) -> Result<Self> {
        LinearOrdering::new(sigma.to_vec())?;
        Ok(Self { sigma })
    }

    pub fn from_ordering(ord: &LinearOrdering) -> Result<Self> {
        let o = ord.order();
        if o.len() != 3 {
            return Err(Error::NotRank3 { n: o.len() });
        }
        Self::new([o[0], o[1], o[2]])
    }

    pub fn label(&self, f: Family) -> usize {
        self.sigma[f.index()]
    }

    pub fn family(&self, vertex: usize) -> Option<Family> {
        Family::ALL.into_iter().find(|&f| self.label(f) == vertex)
    }

    pub fn sigma(&self) -> [usize; 3] {
        self.sigma
    }
}

impl FromStr for FamilyLabeling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_ordering(&s.parse()?)
    }
}

impl fmt::Display for FamilyLabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.sigma[0] + 1, self.sigma[1] + 1, self.sigma[2] + 1)
    }
}

impl Serialize for FamilyLabeling {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.sigma.map(|v| v + 1).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FamilyLabeling {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = <[usize; 3]>::deserialize(d)?;
        let ord = LinearOrdering::from_one_based(&v).map_err(serde::de::Error::custom)?;
        Self::from_ordering(&ord).map_err(serde::de::Error::custom)
    }
}

/// Families crossed by `p`, in order along the curve.
///
/// A vertex lying on a line counts as a crossing when the curve passes to the
/// other side, and is rejected as a tangency otherwise. Segments lying on a
/// line and crossings through lattice points are rejected.
pub fn crossing_families(p: &Polyline) -> Result<Vec<Family>> {
    p.check_shape()?;
    let pts = &p.points;
    let last = pts.len() - 2;
    let mut out = Vec::new();
    for (s, seg) in pts.windows(2).enumerate() {
        let (a, b) = (&seg[0], &seg[1]);
        let mut hits: Vec<(BigRational, Family)> = Vec::new();
        for f in Family::ALL {
            let (fa, fb) = (f.level(a), f.level(b));
            if fa == fb {
                if fa.is_integer() {
                    return Err(Error::DegenerateCrossing(format!(
                        "segment {a} -> {b} lies on a {f:?} line"
                    )));
                }
                continue;
            }
            let (lo, hi) = if fa < fb { (&fa, &fb) } else { (&fb, &fa) };
            let mut k: BigInt = lo.floor().to_integer() + 1;
            let top = hi.ceil().to_integer();
            while k < top {
                let t = (BigRational::from_integer(k.clone()) - &fa) / (&fb - &fa);
                hits.push((t, f));
                k += 1;
            }
            // A vertex on a line is handled by the segment that ends there.
            if s < last && fb.is_integer() {
                let c = &pts[s + 2];
                let fc = f.level(c);
                if fc == fb {
                    return Err(Error::DegenerateCrossing(format!(
                        "segment {b} -> {c} lies on a {f:?} line"
                    )));
                }
                if (fa > fb) == (fc > fb) {
                    return Err(Error::DegenerateCrossing(format!(
                        "curve touches a {f:?} line at {b} without crossing"
                    )));
                }
                hits.push((BigRational::one(), f));
            }
        }
        hits.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
        for (t, f) in hits {
            let x = a.lerp(b, &t);
            if x.is_lattice() {
                return Err(Error::DegenerateCrossing(format!(
                    "curve crosses a lattice point at {x}"
                )));
            }
            out.push(f);
        }
    }
    Ok(out)
}

/// The crossing sequence of `p` as a word under `lab` (not reduced).
pub fn crossing_word(p: &Polyline, lab: &FamilyLabeling) -> Result<Word> {
    Ok(Word(crossing_families(p)?.into_iter().map(|f| lab.label(f)).collect()))
}

/// Admissible: the crossing word has no repeated adjacent letters, is a
/// reflection, and the curve does not cross itself.
pub fn is_admissible_curve(p: &Polyline, lab: &FamilyLabeling) -> Result<bool> {
    let w = crossing_word(p, lab)?;
    Ok(w.is_reduced() && is_reflection(&w) && non_crossing(std::slice::from_ref(p)))
}

type IPoint = (BigInt, BigInt);

/// Polylines rescaled to integer coordinates with a shared denominator.
struct Scaled {
    den: BigInt,
    curves: Vec<Vec<IPoint>>,
}

impl Scaled {
    fn new(ps: &[Polyline]) -> Self {
        let mut den = BigInt::one();
        for p in ps {
            for q in &p.points {
                den = den.lcm(q.x.denom()).lcm(q.y.denom());
            }
        }
        let scale = |r: &BigRational| r.numer() * (&den / r.denom());
        let curves = ps
            .iter()
            .map(|p| p.points.iter().map(|q| (scale(&q.x), scale(&q.y))).collect())
            .collect();
        Self { den, curves }
    }
}

fn orient(a: &IPoint, b: &IPoint, c: &IPoint) -> i8 {
    let v = (&b.0 - &a.0) * (&c.1 - &a.1) - (&b.1 - &a.1) * (&c.0 - &a.0);
    match v.sign() {
        num_bigint::Sign::Plus => 1,
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
    }
}

fn within(a: &IPoint, b: &IPoint, c: &IPoint) -> bool {
    a.0.clone().min(b.0.clone()) <= c.0
        && c.0 <= a.0.clone().max(b.0.clone())
        && a.1.clone().min(b.1.clone()) <= c.1
        && c.1 <= a.1.clone().max(b.1.clone())
}

/// True if segments `a1a2` and `b1b2` meet anywhere except at points for
/// which `allowed` returns true.
fn conflict(a1: &IPoint, a2: &IPoint, b1: &IPoint, b2: &IPoint, allowed: &dyn Fn(&IPoint) -> bool) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    if d1 == 0 && d2 == 0 && d3 == 0 && d4 == 0 {
        // Collinear: compare along the dominant axis.
        let key = |p: &IPoint| if a1.0 != a2.0 || b1.0 != b2.0 { p.0.clone() } else { p.1.clone() };
        let (amin, amax) = minmax(key(a1), key(a2));
        let (bmin, bmax) = minmax(key(b1), key(b2));
        let lo = amin.max(bmin);
        let hi = amax.min(bmax);
        if lo < hi {
            return true;
        }
        if lo == hi {
            let point = [a1, a2].into_iter().find(|p| key(p) == lo).expect("endpoint");
            return !allowed(point);
        }
        return false;
    }
    let touches = [
        (d1 == 0 && within(b1, b2, a1), a1),
        (d2 == 0 && within(b1, b2, a2), a2),
        (d3 == 0 && within(a1, a2, b1), b1),
        (d4 == 0 && within(a1, a2, b2), b2),
    ];
    touches.iter().any(|(hit, p)| *hit && !allowed(p))
}

fn minmax(a: BigInt, b: BigInt) -> (BigInt, BigInt) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn terminals(c: &[IPoint]) -> [&IPoint; 2] {
    [&c[0], &c[c.len() - 1]]
}

fn self_crossing(c: &[IPoint]) -> bool {
    let m = c.len() - 1;
    for s in 0..m {
        for t in s + 1..m {
            let joint = if t == s + 1 { Some(&c[t]) } else { None };
            let allowed = |p: &IPoint| joint == Some(p);
            if conflict(&c[s], &c[s + 1], &c[t], &c[t + 1], &allowed) {
                return true;
            }
        }
    }
    false
}

fn pair_crossing(c: &[IPoint], d: &[IPoint]) -> bool {
    let tc = terminals(c);
    let td = terminals(d);
    let allowed = |p: &IPoint| tc.contains(&p) && td.contains(&p);
    for s in c.windows(2) {
        for t in d.windows(2) {
            if conflict(&s[0], &s[1], &t[0], &t[1], &allowed) {
                return true;
            }
        }
    }
    false
}

/// No curve crosses itself and no two curves meet, except at shared lattice
/// endpoints.
pub fn non_crossing(ps: &[Polyline]) -> bool {
    let sc = Scaled::new(ps);
    let cs = &sc.curves;
    if cs.iter().any(|c| self_crossing(c)) {
        return false;
    }
    for i in 0..cs.len() {
        for j in i + 1..cs.len() {
            if pair_crossing(&cs[i], &cs[j]) {
                return false;
            }
        }
    }
    true
}

fn bbox(c: &[IPoint]) -> (BigInt, BigInt, BigInt, BigInt) {
    let xs = c.iter().map(|p| &p.0);
    let ys = c.iter().map(|p| &p.1);
    (
        xs.clone().min().expect("non-empty").clone(),
        xs.max().expect("non-empty").clone(),
        ys.clone().min().expect("non-empty").clone(),
        ys.max().expect("non-empty").clone(),
    )
}

fn translate(c: &[IPoint], dx: &BigInt, dy: &BigInt) -> Vec<IPoint> {
    c.iter().map(|(x, y)| (x + dx, y + dy)).collect()
}

/// Integer shifts `k` (in lattice units) for which `[lo_b + k, hi_b + k]`
/// meets `[lo_a, hi_a]`.
fn shift_range(lo_a: &BigInt, hi_a: &BigInt, lo_b: &BigInt, hi_b: &BigInt, den: &BigInt) -> std::ops::RangeInclusive<i64> {
    let lo = Integer::div_floor(&(lo_a - hi_b), den);
    let hi = Integer::div_floor(&(hi_a - lo_b), den);
    lo.to_i64().expect("small shift")..=hi.to_i64().expect("small shift")
}

/// [`non_crossing`] on the torus: the curves and all their integer
/// translates are compared.
pub fn torus_non_crossing(ps: &[Polyline]) -> bool {
    if !non_crossing(ps) {
        return false;
    }
    let sc = Scaled::new(ps);
    let den = &sc.den;
    let cs = &sc.curves;
    for i in 0..cs.len() {
        for j in i..cs.len() {
            let (ax0, ax1, ay0, ay1) = bbox(&cs[i]);
            let (bx0, bx1, by0, by1) = bbox(&cs[j]);
            for dx in shift_range(&ax0, &ax1, &bx0, &bx1, den) {
                for dy in shift_range(&ay0, &ay1, &by0, &by1, den) {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let moved = translate(&cs[j], &(den * dx), &(den * dy));
                    if pair_crossing(&cs[i], &moved) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// A triangle of the line arrangement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Triangle {
    Lower(i64, i64),
    Upper(i64, i64),
}

impl Triangle {
    pub fn corners(self) -> [(i64, i64); 3] {
        match self {
            Triangle::Lower(i, j) => [(i, j), (i + 1, j), (i, j + 1)],
            Triangle::Upper(i, j) => [(i + 1, j), (i + 1, j + 1), (i, j + 1)],
        }
    }

    /// Endpoints of the side lying on a line of family `f`, and the
    /// triangle across it.
    pub fn side(self, f: Family) -> ((i64, i64), (i64, i64), Triangle) {
        match (self, f) {
            (Triangle::Lower(i, j), Family::Vertical) => ((i, j), (i, j + 1), Triangle::Upper(i - 1, j)),
            (Triangle::Lower(i, j), Family::Horizontal) => ((i, j), (i + 1, j), Triangle::Upper(i, j - 1)),
            (Triangle::Lower(i, j), Family::Diagonal) => ((i + 1, j), (i, j + 1), Triangle::Upper(i, j)),
            (Triangle::Upper(i, j), Family::Vertical) => ((i + 1, j), (i + 1, j + 1), Triangle::Lower(i + 1, j)),
            (Triangle::Upper(i, j), Family::Horizontal) => ((i, j + 1), (i + 1, j + 1), Triangle::Lower(i, j + 1)),
            (Triangle::Upper(i, j), Family::Diagonal) => ((i + 1, j), (i, j + 1), Triangle::Lower(i, j)),
        }
    }

    /// The six triangles with a corner at the origin.
    pub fn around_origin() -> [Triangle; 6] {
        [
            Triangle::Lower(0, 0),
            Triangle::Upper(-1, 0),
            Triangle::Lower(-1, 0),
            Triangle::Upper(-1, -1),
            Triangle::Lower(0, -1),
            Triangle::Upper(0, -1),
        ]
    }

    fn centroid(self) -> Point {
        let c = self.corners();
        let sx: i64 = c.iter().map(|p| p.0).sum();
        let sy: i64 = c.iter().map(|p| p.1).sum();
        Point::new(frac(sx, 3), frac(sy, 3))
    }
}

/// The triangles visited by a curve that starts in `start` and crosses the
/// given families in order.
pub fn triangle_path(start: Triangle, families: &[Family]) -> Vec<Triangle> {
    let mut path = vec![start];
    for &f in families {
        let next = path.last().expect("non-empty").side(f).2;
        path.push(next);
    }
    path
}

/// Shape parameters for one realization attempt.
#[derive(Clone, Debug)]
struct Attempt {
    /// Crossing points stay at least this fraction away from edge ends.
    margin: BigRational,
    /// Weight of the centroid in each waypoint.
    pull: BigRational,
}

fn attempt(a: usize) -> Attempt {
    const MARGINS: [(i64, i64); 4] = [(1, 3), (1, 5), (1, 9), (1, 17)];
    const PULLS: [i64; 3] = [1, 4, 16];
    let (mn, md) = MARGINS[a % MARGINS.len()];
    let pull = PULLS[(a / MARGINS.len()) % PULLS.len()];
    // Later rounds push crossings further off the straight guide line.
    let round = (a / (MARGINS.len() * PULLS.len())) as i64;
    Attempt {
        margin: frac(mn, md + 2 * round),
        pull: rat(pull + round),
    }
}

/// Where the straight line through `p0` and `p1` meets the edge `e1e2`, as a
/// fraction along the edge, clamped away from the ends.
fn guided_fraction(p0: &Point, p1: &Point, e1: &Point, e2: &Point, margin: &BigRational) -> BigRational {
    let d = (&p1.x - &p0.x, &p1.y - &p0.y);
    let e = (&e2.x - &e1.x, &e2.y - &e1.y);
    let denom = &e.0 * &d.1 - &e.1 * &d.0;
    let half = frac(1, 2);
    if denom.is_zero() {
        return half;
    }
    let w = (&p0.x - &e1.x, &p0.y - &e1.y);
    let s = (&w.0 * &d.1 - &w.1 * &d.0) / denom;
    let upper = BigRational::one() - margin;
    if s < *margin {
        margin.clone()
    } else if s > upper {
        upper
    } else {
        s
    }
}

/// Builds a polyline from the origin through the triangle path to `end`:
/// one waypoint inside each triangle, placed between the neighbouring edge
/// crossings and pulled towards the centroid.
fn realize(path: &[Triangle], families: &[Family], end: (i64, i64), at: &Attempt) -> Polyline {
    let p0 = Point::int(0, 0);
    let p1 = Point::int(end.0, end.1);
    let crossings: Vec<Point> = families
        .iter()
        .zip(path)
        .map(|(&f, &t)| {
            let (a, b, _) = t.side(f);
            let (e1, e2) = (Point::int(a.0, a.1), Point::int(b.0, b.1));
            let s = guided_fraction(&p0, &p1, &e1, &e2, &at.margin);
            e1.lerp(&e2, &s)
        })
        .collect();
    let mut points = vec![p0.clone()];
    let total = rat(2) + &at.pull;
    for (m, t) in path.iter().enumerate() {
        let prev = if m == 0 { &p0 } else { &crossings[m - 1] };
        let next = if m == families.len() { &p1 } else { &crossings[m] };
        let c = t.centroid();
        points.push(Point::new(
            (&prev.x + &next.x + &at.pull * &c.x) / &total,
            (&prev.y + &next.y + &at.pull * &c.y) / &total,
        ));
    }
    points.push(p1);
    Polyline::new(points)
}

/// All curves for `word` found with at most `bound` shape attempts per
/// choice of starting triangle and end point, each validated by
/// [`crossing_word`] and [`non_crossing`].
pub fn curve_candidates(word: &Word, lab: &FamilyLabeling, bound: usize) -> Result<Vec<Polyline>> {
    if word.is_empty() {
        return Err(Error::MalformedReflection("empty word".into()));
    }
    let families = word
        .letters()
        .iter()
        .map(|&v| {
            lab.family(v)
                .ok_or_else(|| Error::MalformedReflection(format!("letter {} has no family", v + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for start in Triangle::around_origin() {
        let path = triangle_path(start, &families);
        let last = *path.last().expect("non-empty");
        for end in last.corners() {
            if end == (0, 0) {
                continue;
            }
            for a in 0..bound {
                let p = realize(&path, &families, end, &attempt(a));
                if crossing_word(&p, lab).ok().as_ref() == Some(word) && non_crossing(std::slice::from_ref(&p)) {
                    out.push(p);
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// A non-self-crossing curve from the origin whose crossing word is the
/// word of `r`.
pub fn curve_for_reflection(r: &Reflection, lab: &FamilyLabeling, bound: usize) -> Result<Polyline> {
    curve_candidates(r.word(), lab, bound)?
        .into_iter()
        .next()
        .ok_or(Error::CurveNotFound { bound })
}

/// A joint choice of curves for several reflections.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveFamily {
    pub curves: Vec<Polyline>,
    /// True when the curves and all their translates are pairwise
    /// non-crossing, not only the curves themselves.
    pub torus_non_crossing: bool,
}

/// Pair tests the torus pass may spend before falling back to planar
/// non-crossing.
const TORUS_BUDGET: usize = 400;

/// Picks one candidate per reflection so that the set is pairwise
/// non-crossing, preferring choices that stay non-crossing on the torus.
pub fn curves_for_reflections(refs: &[Reflection], lab: &FamilyLabeling, bound: usize) -> Result<CurveFamily> {
    let cands = refs
        .iter()
        .map(|r| curve_candidates(r.word(), lab, bound))
        .collect::<Result<Vec<_>>>()?;
    if cands.iter().any(Vec::is_empty) {
        return Err(Error::CurveNotFound { bound });
    }
    for torus in [true, false] {
        let mut search = JointSearch {
            cands: &cands,
            torus,
            memo: HashMap::new(),
            budget: if torus { TORUS_BUDGET } else { usize::MAX },
        };
        if let Some(picked) = search.choose(&mut Vec::new()) {
            return Ok(CurveFamily {
                curves: picked.iter().enumerate().map(|(i, &c)| cands[i][c].clone()).collect(),
                torus_non_crossing: torus,
            });
        }
    }
    Err(Error::CurveNotFound { bound })
}

/// Depth-first choice of one candidate per slot with memoized pair tests.
struct JointSearch<'a> {
    cands: &'a [Vec<Polyline>],
    torus: bool,
    memo: HashMap<(usize, usize, usize, usize), bool>,
    budget: usize,
}

impl JointSearch<'_> {
    fn compatible(&mut self, i: usize, a: usize, j: usize, b: usize) -> Option<bool> {
        if let Some(&v) = self.memo.get(&(i, a, j, b)) {
            return Some(v);
        }
        if self.budget == 0 {
            return None;
        }
        self.budget -= 1;
        let ps = if i == j {
            vec![self.cands[i][a].clone()]
        } else {
            vec![self.cands[i][a].clone(), self.cands[j][b].clone()]
        };
        let v = if self.torus { torus_non_crossing(&ps) } else { non_crossing(&ps) };
        self.memo.insert((i, a, j, b), v);
        Some(v)
    }

    fn choose(&mut self, picked: &mut Vec<usize>) -> Option<Vec<usize>> {
        let m = picked.len();
        if m == self.cands.len() {
            return Some(picked.clone());
        }
        'next: for c in 0..self.cands[m].len() {
            if !self.compatible(m, c, m, c)? {
                continue;
            }
            for i in 0..m {
                if !self.compatible(i, picked[i], m, c)? {
                    continue 'next;
                }
            }
            picked.push(c);
            if let Some(found) = self.choose(picked) {
                return Some(found);
            }
            picked.pop();
        }
        None
    }
}

/// Integer window `[x0, x1] × [y0, y1]` for rendering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Window {
    /// Smallest window containing every point, padded by one cell.
    pub fn around(ps: &[Polyline]) -> Window {
        let mut w = Window { x0: -1, y0: -1, x1: 1, y1: 1 };
        for p in ps {
            for q in &p.points {
                let x = q.x.floor().to_integer().to_i64().unwrap_or(0);
                let y = q.y.floor().to_integer().to_i64().unwrap_or(0);
                w.x0 = w.x0.min(x - 1);
                w.y0 = w.y0.min(y - 1);
                w.x1 = w.x1.max(x + 2);
                w.y1 = w.y1.max(y + 2);
            }
        }
        w
    }
}

const SCALE: f64 = 100.0;
const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// SVG drawing of the three line families over `window`, the lattice points,
/// and the curves in palette order.
pub fn render_svg(ps: &[Polyline], window: Window) -> String {
    let Window { x0, y0, x1, y1 } = window;
    let sx = |x: f64| (x - x0 as f64) * SCALE;
    let sy = |y: f64| (y1 as f64 - y) * SCALE;
    let width = (x1 - x0) as f64 * SCALE;
    let height = (y1 - y0) as f64 * SCALE;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
    let line = |s: &mut String, class: &str, a: (f64, f64), b: (f64, f64)| {
        let _ = writeln!(
            s,
            r##"<line class="{class}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#999999" stroke-width="1"/>"##,
            sx(a.0),
            sy(a.1),
            sx(b.0),
            sy(b.1)
        );
    };
    let _ = writeln!(s, r#"<g id="grid">"#);
    for x in x0..=x1 {
        line(&mut s, "vertical", (x as f64, y0 as f64), (x as f64, y1 as f64));
    }
    for y in y0..=y1 {
        line(&mut s, "horizontal", (x0 as f64, y as f64), (x1 as f64, y as f64));
    }
    for k in (x0 + y0 + 1)..(x1 + y1) {
        // Clip x + y = k to the window.
        let xa = (k - y1).max(x0);
        let xb = (k - y0).min(x1);
        if xa < xb {
            line(&mut s, "diagonal", (xa as f64, (k - xa) as f64), (xb as f64, (k - xb) as f64));
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="lattice">"#);
    for x in x0..=x1 {
        for y in y0..=y1 {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="black"/>"#,
                sx(x as f64),
                sy(y as f64)
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="curves" fill="none" stroke-width="3">"#);
    for (i, p) in ps.iter().enumerate() {
        let pts: Vec<String> = p
            .points
            .iter()
            .map(|q| {
                let (x, y) = q.to_f64();
                format!("{:.3},{:.3}", sx(x), sy(y))
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline id="curve-{}" stroke="{}" points="{}"/>"#,
            i + 1,
            PALETTE[i % PALETTE.len()],
            pts.join(" ")
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab() -> FamilyLabeling {
        "2,1,3".parse().unwrap()
    }

    fn seg(a: (i64, i64), b: (i64, i64)) -> Polyline {
        Polyline::segment(Point::int(a.0, a.1), Point::int(b.0, b.1))
    }

    fn word(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn straight_segments() {
        assert_eq!(crossing_word(&seg((0, 0), (1, 1)), &lab()).unwrap(), word("1"));
        assert_eq!(crossing_word(&seg((0, 0), (2, 1)), &lab()).unwrap(), word("1,2,1"));
        assert_eq!(crossing_word(&seg((2, 1), (0, 0)), &lab()).unwrap(), word("1,2,1"));
        assert_eq!(crossing_word(&seg((0, 0), (1, 2)), &lab()).unwrap(), word("1,3,1"));
        assert!(is_admissible_curve(&seg((0, 0), (2, 1)), &lab()).unwrap());
        assert!(is_admissible_curve(&seg((0, 0), (1, 1)), &lab()).unwrap());
    }

    #[test]
    fn degenerate_curves() {
        assert!(crossing_word(&seg((0, 0), (1, 0)), &lab()).is_err());
        assert!(crossing_word(&seg((0, 0), (2, 2)), &lab()).is_err());
        let bent = Polyline::new(vec![
            Point::int(0, 0),
            Point::new(frac(1, 2), frac(1, 2)),
            Point::int(0, 1),
        ]);
        assert!(matches!(crossing_word(&bent, &lab()), Err(Error::DegenerateCrossing(_))));
    }

    #[test]
    fn even_word_is_not_admissible() {
        // Crosses a diagonal, then a vertical line.
        let p = Polyline::new(vec![
            Point::int(0, 0),
            Point::new(frac(2, 3), frac(1, 2)),
            Point::new(frac(4, 3), frac(1, 3)),
            Point::int(2, 0),
        ]);
        let w = crossing_word(&p, &lab()).unwrap();
        assert_eq!(w.len() % 2, 0);
        assert!(!is_admissible_curve(&p, &lab()).unwrap());
    }

    #[test]
    fn crossing_tests() {
        assert!(non_crossing(&[seg((0, 0), (1, 1))]));
        let a = Polyline::segment(Point::new(frac(1, 3), rat(0)), Point::new(frac(1, 3), rat(1)));
        let b = Polyline::segment(Point::new(frac(2, 3), rat(0)), Point::new(frac(2, 3), rat(1)));
        assert!(non_crossing(&[a, b]));
        assert!(!non_crossing(&[seg((0, 0), (1, 1)), seg((1, 0), (0, 1))]));
        assert!(non_crossing(&[seg((0, 0), (1, 1)), seg((0, 0), (2, 1))]));
    }

    #[test]
    fn torus_crossings() {
        assert!(torus_non_crossing(&[seg((0, 0), (1, 1)), seg((0, 0), (1, 2))]));
        assert!(!torus_non_crossing(&[seg((0, 0), (1, 1)), seg((0, 0), (2, -1))]));
    }

    #[test]
    fn search_finds_curves_for_short_words() {
        for w in ["1", "2", "3", "1,2,1", "1,3,1", "2,1,3,1,2"] {
            let r = Reflection::new(word(w)).unwrap();
            let p = curve_for_reflection(&r, &lab(), 8).unwrap();
            assert_eq!(crossing_word(&p, &lab()).unwrap(), word(w));
            assert!(non_crossing(std::slice::from_ref(&p)));
        }
    }

    #[test]
    fn svg_is_deterministic() {
        let ps = vec![seg((0, 0), (1, 1))];
        let w = Window::around(&ps);
        let a = render_svg(&ps, w);
        assert_eq!(a, render_svg(&ps, w));
        assert!(a.contains("curve-1"));
        assert!(render_svg(&[], w).contains(r#"id="grid""#));
    }
}
