//! Finite linear spaces.
//!
//! A [`LinearSpace`] stores its point count and its nontrivial lines (lines
//! with at least three points). Every pair of points not covered by a stored
//! line is joined by an implicit two-point line, so the first axiom holds by
//! construction and only the "two lines meet in at most one point" axiom
//! needs checking.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Point identifier. Points of an `n`-point space are `0..n`.
pub type Point = usize;

/// A line given by its (sorted) points.
pub type Line = Vec<Point>;

const NO_LINE: u32 = u32::MAX;

/// Raw input rejected by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("line {line:?} contains point {point} twice")]
    DuplicatePointInLine { line: Vec<Point>, point: Point },
    #[error("line {line:?} has fewer than two points")]
    LineTooSmall { line: Vec<Point> },
    #[error("point {point} out of range for a space on {n_points} points")]
    PointOutOfRange { point: Point, n_points: usize },
    #[error("TwoLinesShareTwoPoints: lines {first:?} and {second:?} share points {points:?}")]
    TwoLinesShareTwoPoints {
        first: Line,
        second: Line,
        points: (Point, Point),
    },
}

/// Errors from queries on an already valid space.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("point {point} out of range for a space on {n_points} points")]
    PointOutOfRange { point: Point, n_points: usize },
    #[error("a line needs two distinct points, got {0} twice")]
    EqualPoints(Point),
    #[error("the space is not closed: lines {0:?} and {1:?} are parallel")]
    NotClosed(Line, Line),
    #[error("point {0} lies on fewer than two lines")]
    PointDegreeBelowTwo(Point),
}

/// Something [`validate`] changed about its input without rejecting it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum NormalizationNote {
    /// A declared two-point line was dropped; such lines are implicit.
    DroppedTrivialLine(Line),
    /// The same line was declared more than once.
    DroppedDuplicateLine(Line),
}

impl fmt::Display for NormalizationNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalizationNote::DroppedTrivialLine(l) => {
                write!(f, "dropped declared two-point line {l:?}")
            }
            NormalizationNote::DroppedDuplicateLine(l) => {
                write!(f, "dropped duplicate line {l:?}")
            }
        }
    }
}

/// Result of [`validate`]: the canonical space plus any normalization notes.
#[derive(Debug, Clone)]
pub struct Validated {
    pub space: LinearSpace,
    pub notes: Vec<NormalizationNote>,
}

/// A finite linear space.
///
/// Immutable after construction. Lines are kept sorted internally and in
/// lexicographic order, so two spaces compare equal iff they have the same
/// labelled structure.
#[derive(Clone)]
pub struct LinearSpace {
    n: usize,
    lines: Vec<Line>,
    // indices into `lines`, ascending
    point_lines: Vec<Vec<u32>>,
}

impl PartialEq for LinearSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.lines == other.lines
    }
}

impl Eq for LinearSpace {}

impl std::hash::Hash for LinearSpace {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.lines.hash(state);
    }
}

impl fmt::Debug for LinearSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearSpace({}; {{", self.n)?;
        for (i, l) in self.lines.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            for p in l {
                write!(f, "{p}")?;
                if self.n > 10 {
                    write!(f, ".")?;
                }
            }
        }
        write!(f, "}})")
    }
}

/// Validates raw input and returns the canonical space.
///
/// Declared two-point lines are dropped (with a note) before the pairwise
/// intersection check, since they carry no information.
pub fn validate(n_points: usize, raw_lines: &[Vec<Point>]) -> Result<Validated, ValidationError> {
    let mut notes = Vec::new();
    let mut kept: Vec<Line> = Vec::new();
    for raw in raw_lines {
        let mut line = raw.clone();
        line.sort_unstable();
        if let Some(&p) = line.iter().find(|&&p| p >= n_points) {
            return Err(ValidationError::PointOutOfRange { point: p, n_points });
        }
        if let Some(w) = line.windows(2).find(|w| w[0] == w[1]) {
            return Err(ValidationError::DuplicatePointInLine {
                line: raw.clone(),
                point: w[0],
            });
        }
        match line.len() {
            0 | 1 => return Err(ValidationError::LineTooSmall { line: raw.clone() }),
            2 => notes.push(NormalizationNote::DroppedTrivialLine(line)),
            _ => kept.push(line),
        }
    }
    kept.sort();
    let before = kept.len();
    let mut deduped: Vec<Line> = Vec::with_capacity(before);
    for l in kept {
        if deduped.last() == Some(&l) {
            notes.push(NormalizationNote::DroppedDuplicateLine(l));
        } else {
            deduped.push(l);
        }
    }
    let space = LinearSpace::from_sorted_lines(n_points, deduped)?;
    Ok(Validated { space, notes })
}

impl LinearSpace {
    /// Builds a space, dropping any normalization notes.
    pub fn new(n_points: usize, lines: &[Vec<Point>]) -> Result<Self, ValidationError> {
        validate(n_points, lines).map(|v| v.space)
    }

    /// The space on `n` points with no nontrivial lines.
    pub fn trivial(n: usize) -> Self {
        LinearSpace {
            n,
            lines: Vec::new(),
            point_lines: vec![Vec::new(); n],
        }
    }

    /// `lines` must be individually sorted, of size at least 3, in range,
    /// lexicographically sorted and duplicate-free.
    fn from_sorted_lines(n: usize, lines: Vec<Line>) -> Result<Self, ValidationError> {
        let mut owner: HashMap<(u32, u32), u32> = HashMap::new();
        for (li, line) in lines.iter().enumerate() {
            for (i, &x) in line.iter().enumerate() {
                for &y in &line[i + 1..] {
                    if let Some(&prev) = owner.get(&(x as u32, y as u32)) {
                        return Err(ValidationError::TwoLinesShareTwoPoints {
                            first: lines[prev as usize].clone(),
                            second: line.clone(),
                            points: (x, y),
                        });
                    }
                    owner.insert((x as u32, y as u32), li as u32);
                }
            }
        }
        let mut point_lines = vec![Vec::new(); n];
        for (li, line) in lines.iter().enumerate() {
            for &p in line {
                point_lines[p].push(li as u32);
            }
        }
        Ok(LinearSpace {
            n,
            lines,
            point_lines,
        })
    }

    /// Builds a space from unsorted nontrivial lines known to be valid.
    /// Panics if they are not; used by constructions that are valid by
    /// construction.
    pub(crate) fn from_lines_trusted(n: usize, mut lines: Vec<Line>) -> Self {
        for l in &mut lines {
            l.sort_unstable();
        }
        lines.retain(|l| l.len() >= 3);
        lines.sort();
        lines.dedup();
        match Self::from_sorted_lines(n, lines) {
            Ok(s) => s,
            Err(e) => panic!("construction produced an invalid linear space: {e}"),
        }
    }

    /// Builds a space from unsorted lines of any size, checking the axioms.
    pub fn from_lines(n: usize, lines: Vec<Line>) -> Result<Self, ValidationError> {
        Self::new(n, &lines)
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    /// The stored (nontrivial) lines in canonical order.
    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    /// Indices (into [`lines`](Self::lines)) of nontrivial lines through `p`.
    pub fn lines_through(&self, p: Point) -> &[u32] {
        &self.point_lines[p]
    }

    pub fn is_trivial(&self) -> bool {
        self.lines.is_empty()
    }

    fn check_point(&self, p: Point) -> Result<(), SpaceError> {
        if p >= self.n {
            Err(SpaceError::PointOutOfRange {
                point: p,
                n_points: self.n,
            })
        } else {
            Ok(())
        }
    }

    /// Index of the nontrivial line through `x` and `y`, if any.
    pub fn stored_line_index(&self, x: Point, y: Point) -> Option<usize> {
        let (a, b) = (&self.point_lines[x], &self.point_lines[y]);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return Some(a[i] as usize),
            }
        }
        None
    }

    /// Collinearity: true when the three points are not pairwise distinct or
    /// some line contains all of them.
    pub fn collinear(&self, x: Point, y: Point, z: Point) -> Result<bool, SpaceError> {
        self.check_point(x)?;
        self.check_point(y)?;
        self.check_point(z)?;
        Ok(self.collinear_unchecked(x, y, z))
    }

    pub(crate) fn collinear_unchecked(&self, x: Point, y: Point, z: Point) -> bool {
        if x == y || y == z || x == z {
            return true;
        }
        match self.stored_line_index(x, y) {
            Some(li) => self.lines[li].binary_search(&z).is_ok(),
            None => false,
        }
    }

    /// The line through two distinct points: a stored line, or `{x, y}`.
    pub fn line_through(&self, x: Point, y: Point) -> Result<Line, SpaceError> {
        self.check_point(x)?;
        self.check_point(y)?;
        if x == y {
            return Err(SpaceError::EqualPoints(x));
        }
        Ok(self.line_through_unchecked(x, y))
    }

    pub(crate) fn line_through_unchecked(&self, x: Point, y: Point) -> Line {
        match self.stored_line_index(x, y) {
            Some(li) => self.lines[li].clone(),
            None if x < y => vec![x, y],
            None => vec![y, x],
        }
    }

    /// Whether `line` (sorted) is a line of this space, trivial or not.
    pub fn is_line(&self, line: &[Point]) -> bool {
        if line.len() < 2 || line.iter().any(|&p| p >= self.n) {
            return false;
        }
        if line.windows(2).any(|w| w[0] >= w[1]) {
            return false;
        }
        match self.stored_line_index(line[0], line[1]) {
            Some(li) => self.lines[li] == line,
            None => line.len() == 2,
        }
    }

    /// All lines, with the implicit two-point lines materialized, in
    /// lexicographic order. Every point pair lies in exactly one of them.
    pub fn all_lines(&self) -> Vec<Line> {
        let mut out = self.lines.clone();
        for x in 0..self.n {
            for y in x + 1..self.n {
                if self.stored_line_index(x, y).is_none() {
                    out.push(vec![x, y]);
                }
            }
        }
        out.sort();
        out
    }

    /// Number of lines (trivial ones included) through `p`.
    pub fn point_degree(&self, p: Point) -> usize {
        if self.n <= 1 {
            return 0;
        }
        let stored = &self.point_lines[p];
        let covered: usize = stored
            .iter()
            .map(|&li| self.lines[li as usize].len() - 1)
            .sum();
        stored.len() + (self.n - 1 - covered)
    }

    /// Total number of lines, trivial ones included.
    pub fn line_count(&self) -> usize {
        let pairs = self.n * self.n.saturating_sub(1) / 2;
        let covered: usize = self.lines.iter().map(|l| l.len() * (l.len() - 1) / 2).sum();
        self.lines.len() + pairs - covered
    }

    /// Per-point degrees, per-line degrees (in [`all_lines`](Self::all_lines)
    /// order) and the space degree.
    pub fn degrees(&self) -> Degrees {
        let points: Vec<usize> = (0..self.n).map(|p| self.point_degree(p)).collect();
        let lines: Vec<usize> = self.all_lines().iter().map(Vec::len).collect();
        let space = points
            .iter()
            .chain(lines.iter())
            .copied()
            .max()
            .unwrap_or(0);
        Degrees {
            points,
            lines,
            space,
        }
    }

    /// Space degree without materializing trivial lines.
    pub fn degree(&self) -> usize {
        let pd = (0..self.n).map(|p| self.point_degree(p)).max().unwrap_or(0);
        let stored = self.lines.iter().map(Vec::len).max().unwrap_or(0);
        let trivial = if self.line_count() > self.lines.len() {
            2
        } else {
            0
        };
        pd.max(stored).max(trivial)
    }

    /// True iff no stored line contains three or more points of `s`.
    pub fn is_independent(&self, s: &[Point]) -> Result<bool, SpaceError> {
        for &p in s {
            self.check_point(p)?;
        }
        let mut set = s.to_vec();
        set.sort_unstable();
        set.dedup();
        Ok(self
            .lines
            .iter()
            .all(|l| l.iter().filter(|p| set.binary_search(p).is_ok()).count() < 3))
    }

    /// Number of unordered pairs of lines (trivial ones included) that meet.
    fn meeting_line_pairs(&self) -> usize {
        (0..self.n)
            .map(|p| {
                let d = self.point_degree(p);
                d * d.saturating_sub(1) / 2
            })
            .sum()
    }

    /// Number of unordered parallel line pairs, computed by counting.
    pub fn parallel_pair_count(&self) -> usize {
        let l = self.line_count();
        l * l.saturating_sub(1) / 2 - self.meeting_line_pairs()
    }

    /// Every two lines meet.
    pub fn is_closed(&self) -> bool {
        self.parallel_pair_count() == 0
    }

    /// No independent 4-set. Brute force over 4-subsets for up to 25 points,
    /// the line-plus-point characterization beyond that.
    pub fn is_degenerate(&self) -> bool {
        if self.n <= 25 {
            self.find_independent_set(4).is_none()
        } else {
            self.is_degenerate_structural()
        }
    }

    /// Degenerate iff some line misses at most one point.
    pub fn is_degenerate_structural(&self) -> bool {
        if self.n <= 3 {
            return true;
        }
        if self.lines.iter().any(|l| l.len() + 1 >= self.n) {
            return true;
        }
        // trivial lines cover 2 points; they miss at most one only when n <= 3
        false
    }

    /// Lexicographically least independent set of the given size.
    pub fn find_independent_set(&self, size: usize) -> Option<Vec<Point>> {
        let mut chosen = Vec::with_capacity(size);
        self.extend_independent(0, size, &mut chosen)
            .then_some(chosen)
    }

    fn extend_independent(&self, from: Point, size: usize, chosen: &mut Vec<Point>) -> bool {
        if chosen.len() == size {
            return true;
        }
        for p in from..self.n {
            if self.n - p < size - chosen.len() {
                break;
            }
            let ok = (0..chosen.len()).all(|i| {
                (i + 1..chosen.len()).all(|j| !self.collinear_unchecked(chosen[i], chosen[j], p))
            });
            if ok {
                chosen.push(p);
                if self.extend_independent(p + 1, size, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    /// All parallel (disjoint) pairs of lines, trivial ones included, as
    /// index pairs `(i, j)`, `i < j`, into [`all_lines`](Self::all_lines).
    pub fn parallel_pair_indices(&self, all: &[Line]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if disjoint(&all[i], &all[j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// All parallel pairs of lines in canonical order.
    pub fn parallel_pairs(&self) -> Vec<(Line, Line)> {
        let all = self.all_lines();
        self.parallel_pair_indices(&all)
            .into_iter()
            .map(|(i, j)| (all[i].clone(), all[j].clone()))
            .collect()
    }

    /// Shape flags and degree.
    pub fn classify_shape(&self) -> ShapeReport {
        let n = self.n;
        let is_trivial = self.is_trivial();
        let is_line = n <= 2 || self.lines.iter().any(|l| l.len() == n);
        let is_near_pencil =
            !is_line && n >= 3 && (self.lines.iter().any(|l| l.len() + 1 == n) || n == 3);
        let is_pentagon = n == 5 && is_trivial;
        let is_degenerate = self.is_degenerate();
        let is_closed = self.is_closed();
        let is_projective_plane = is_closed && !is_degenerate;
        let degree = self.degree();
        ShapeReport {
            n_points: n,
            n_lines: self.line_count(),
            is_trivial,
            is_line,
            is_near_pencil,
            is_pentagon,
            is_degenerate,
            is_closed,
            is_projective_plane,
            degree,
            order: is_projective_plane.then(|| degree - 1),
        }
    }

    /// The dual space: points are the lines of this space, and each point of
    /// degree at least 3 becomes the line of lines through it.
    pub fn dual(&self) -> Result<LinearSpace, SpaceError> {
        let all = self.all_lines();
        if let Some((i, j)) = first_parallel(&all) {
            return Err(SpaceError::NotClosed(all[i].clone(), all[j].clone()));
        }
        if let Some(p) = (0..self.n).find(|&p| self.point_degree(p) < 2) {
            return Err(SpaceError::PointDegreeBelowTwo(p));
        }
        let mut through: Vec<Vec<Point>> = vec![Vec::new(); self.n];
        for (li, l) in all.iter().enumerate() {
            for &p in l {
                through[p].push(li);
            }
        }
        Ok(LinearSpace::from_lines_trusted(all.len(), through))
    }

    /// Substructure induced on `points`, relabelled `points[i] -> i`.
    pub fn induced(&self, points: &[Point]) -> LinearSpace {
        let mut relabel = vec![usize::MAX; self.n];
        for (i, &p) in points.iter().enumerate() {
            relabel[p] = i;
        }
        let lines = self
            .lines
            .iter()
            .map(|l| {
                l.iter()
                    .filter(|&&p| relabel[p] != usize::MAX)
                    .map(|&p| relabel[p])
                    .collect::<Vec<_>>()
            })
            .filter(|l| l.len() >= 3)
            .collect();
        LinearSpace::from_lines_trusted(points.len(), lines)
    }

    /// Substructure induced on `0..m`.
    pub fn restrict_prefix(&self, m: usize) -> LinearSpace {
        let pts: Vec<Point> = (0..m).collect();
        self.induced(&pts)
    }

    /// Image of this space under a permutation (`perm[old] = new`).
    pub fn permuted(&self, perm: &[Point]) -> LinearSpace {
        let lines = self
            .lines
            .iter()
            .map(|l| l.iter().map(|&p| perm[p]).collect())
            .collect();
        LinearSpace::from_lines_trusted(self.n, lines)
    }

    /// Adds one point lying on each of the given pairwise disjoint lines
    /// (trivial or not). The new point gets id `n_points()`.
    pub(crate) fn with_point_on(&self, lines: &[&[Point]]) -> LinearSpace {
        let p = self.n;
        let mut new_lines: Vec<Line> = Vec::with_capacity(self.lines.len() + lines.len());
        let mut extended = vec![false; self.lines.len()];
        for l in lines {
            match self.stored_line_index(l[0], l[1]) {
                Some(li) => extended[li] = true,
                None => new_lines.push(vec![l[0], l[1], p]),
            }
        }
        for (li, l) in self.lines.iter().enumerate() {
            let mut l = l.clone();
            if extended[li] {
                l.push(p);
            }
            new_lines.push(l);
        }
        LinearSpace::from_lines_trusted(self.n + 1, new_lines)
    }

    /// Adds `count` points on no nontrivial line.
    pub fn with_free_points(&self, count: usize) -> LinearSpace {
        LinearSpace::from_lines_trusted(self.n + count, self.lines.clone())
    }
}

/// Degrees as returned by [`LinearSpace::degrees`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Degrees {
    pub points: Vec<usize>,
    pub lines: Vec<usize>,
    pub space: usize,
}

/// Shape classification of a space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShapeReport {
    pub n_points: usize,
    pub n_lines: usize,
    pub is_trivial: bool,
    pub is_line: bool,
    /// One line plus one point off it.
    pub is_near_pencil: bool,
    pub is_pentagon: bool,
    pub is_degenerate: bool,
    pub is_closed: bool,
    pub is_projective_plane: bool,
    pub degree: usize,
    pub order: Option<usize>,
}

pub(crate) fn disjoint(a: &[Point], b: &[Point]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

pub(crate) fn intersection(a: &[Point], b: &[Point]) -> Vec<Point> {
    a.iter()
        .filter(|p| b.binary_search(p).is_ok())
        .copied()
        .collect()
}

fn first_parallel(all: &[Line]) -> Option<(usize, usize)> {
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if disjoint(&all[i], &all[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Dense pair-to-line table over [`LinearSpace::all_lines`], for search
/// code that queries collinearity in inner loops.
#[derive(Debug, Clone)]
pub(crate) struct Dense {
    pub n: usize,
    pub lines: Vec<Line>,
    line_of: Vec<u32>,
    /// line ids through each point
    pub point_lines: Vec<Vec<u32>>,
}

impl Dense {
    pub fn new(space: &LinearSpace) -> Self {
        let n = space.n_points();
        let lines = space.all_lines();
        let mut line_of = vec![NO_LINE; n * n];
        let mut point_lines = vec![Vec::new(); n];
        for (li, l) in lines.iter().enumerate() {
            for (i, &x) in l.iter().enumerate() {
                point_lines[x].push(li as u32);
                for &y in &l[i + 1..] {
                    line_of[x * n + y] = li as u32;
                    line_of[y * n + x] = li as u32;
                }
            }
        }
        Dense {
            n,
            lines,
            line_of,
            point_lines,
        }
    }

    /// Line id through two distinct points.
    #[inline]
    pub fn line(&self, x: Point, y: Point) -> u32 {
        self.line_of[x * self.n + y]
    }

    #[inline]
    pub fn collinear(&self, x: Point, y: Point, z: Point) -> bool {
        x == y || y == z || x == z || self.line(x, y) == self.line(x, z)
    }

    pub fn degree(&self, p: Point) -> usize {
        self.point_lines[p].len()
    }

    /// Sizes of lines through `p`, descending.
    pub fn profile(&self, p: Point) -> Vec<usize> {
        let mut v: Vec<usize> = self.point_lines[p]
            .iter()
            .map(|&l| self.lines[l as usize].len())
            .collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    points: usize,
    lines: Vec<Vec<Point>>,
}

impl Serialize for LinearSpace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SpaceRepr {
            points: self.n,
            lines: self.lines.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = SpaceRepr::deserialize(d)?;
        LinearSpace::new(repr.points, &repr.lines).map_err(serde::de::Error::custom)
    }
}

/// Well-known small spaces used throughout the crate and its tests.
pub mod named {
    use super::LinearSpace;

    /// The Fano plane with lines 012, 034, 056, 135, 146, 236, 245.
    pub fn fano() -> LinearSpace {
        LinearSpace::new(
            7,
            &[
                vec![0, 1, 2],
                vec![0, 3, 4],
                vec![0, 5, 6],
                vec![1, 3, 5],
                vec![1, 4, 6],
                vec![2, 3, 6],
                vec![2, 4, 5],
            ],
        )
        .expect("Fano labelling is valid")
    }

    /// Five points, all lines trivial.
    pub fn pentagon() -> LinearSpace {
        LinearSpace::trivial(5)
    }

    /// Four points, all lines trivial.
    pub fn quadrilateral() -> LinearSpace {
        LinearSpace::trivial(4)
    }

    /// Three points, all lines trivial.
    pub fn triangle() -> LinearSpace {
        LinearSpace::trivial(3)
    }

    /// A single line on `n` points.
    pub fn line(n: usize) -> LinearSpace {
        if n < 3 {
            LinearSpace::trivial(n)
        } else {
            LinearSpace::new(n, &[(0..n).collect()]).expect("a single line is valid")
        }
    }

    /// A line on `n - 1` points plus one point off it.
    pub fn near_pencil(n: usize) -> LinearSpace {
        assert!(n >= 3);
        if n == 3 {
            LinearSpace::trivial(3)
        } else {
            LinearSpace::new(n, &[(0..n - 1).collect()]).expect("near-pencil is valid")
        }
    }
}
