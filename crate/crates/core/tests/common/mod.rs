//! Brute-force oracles shared by the integration suites. They use only the
//! public line lists of a space and never the search engines under test.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use linspace::{LinearSpace, Point};
use rand::seq::SliceRandom;
use rand::Rng;

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    let mut p: Vec<Point> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

fn line_set(s: &LinearSpace) -> HashSet<Vec<Point>> {
    s.all_lines().into_iter().collect()
}

fn image(l: &[Point], p: &[Point]) -> Vec<Point> {
    let mut v: Vec<Point> = l.iter().map(|&x| p[x]).collect();
    v.sort_unstable();
    v
}

/// Automorphisms by testing every permutation.
pub fn brute_automorphisms(s: &LinearSpace) -> Vec<Vec<Point>> {
    let lines = line_set(s);
    permutations(s.n_points())
        .into_iter()
        .filter(|p| lines.iter().all(|l| lines.contains(&image(l, p))))
        .collect()
}

/// `col[x][y][z]` for the space; triples with a repeated point count as
/// collinear.
#[allow(clippy::needless_range_loop)]
pub fn collinearity(s: &LinearSpace) -> Vec<Vec<Vec<bool>>> {
    let n = s.n_points();
    let mut col = vec![vec![vec![false; n]; n]; n];
    for x in 0..n {
        for y in 0..n {
            col[x][x][y] = true;
            col[x][y][x] = true;
            col[y][x][x] = true;
        }
    }
    for l in s.all_lines() {
        for &x in &l {
            for &y in &l {
                for &z in &l {
                    col[x][y][z] = true;
                }
            }
        }
    }
    col
}

/// Injective maps `d -> 0..n` in lexicographic order of image tuples.
fn injections(d: usize, n: usize, f: &mut dyn FnMut(&[Point])) {
    fn go(
        d: usize,
        n: usize,
        cur: &mut Vec<Point>,
        used: &mut [bool],
        f: &mut dyn FnMut(&[Point]),
    ) {
        if cur.len() == d {
            f(cur);
            return;
        }
        for y in 0..n {
            if !used[y] {
                used[y] = true;
                cur.push(y);
                go(d, n, cur, used, f);
                cur.pop();
                used[y] = false;
            }
        }
    }
    go(d, n, &mut Vec::new(), &mut vec![false; n], f);
}

/// All subsets of `0..n` of size `k`, lexicographic.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<Point>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<Point>, out: &mut Vec<Vec<Point>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            cur.push(x);
            go(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Smallest partial isomorphism (by domain size, domain, image) with no
/// extension to an automorphism, over domains of size at most `max_domain`.
/// No orbit pruning: every subset and every injection is tried.
pub fn brute_homogeneity_witness(
    s: &LinearSpace,
    max_domain: usize,
) -> Option<(Vec<Point>, Vec<Point>)> {
    let n = s.n_points();
    let col = collinearity(s);
    let aut = brute_automorphisms(s);
    for k in 0..=max_domain.min(n) {
        for d in subsets(n, k) {
            let mut found = None;
            injections(k, n, &mut |img| {
                if found.is_some() {
                    return;
                }
                let iso = (0..k).all(|i| {
                    (0..k).all(|j| {
                        (0..k).all(|l| col[d[i]][d[j]][d[l]] == col[img[i]][img[j]][img[l]])
                    })
                });
                if iso && !aut.iter().any(|a| (0..k).all(|i| a[d[i]] == img[i])) {
                    found = Some(img.to_vec());
                }
            });
            if let Some(img) = found {
                return Some((d, img));
            }
        }
    }
    None
}

/// Invariant under relabelling: the least relabelled line list.
pub fn brute_canonical(s: &LinearSpace) -> Vec<Vec<Point>> {
    permutations(s.n_points())
        .iter()
        .map(|p| {
            let mut ls: Vec<Vec<Point>> = s.lines().iter().map(|l| image(l, p)).collect();
            ls.sort();
            ls
        })
        .min()
        .unwrap_or_default()
}

/// Every linear space on `n` points as a set of nontrivial lines, up to
/// isomorphism, by choosing sets of at-least-3-subsets that pairwise meet
/// in at most one point.
pub fn brute_enumerate(n: usize) -> BTreeSet<Vec<Vec<Point>>> {
    let cands: Vec<Vec<Point>> = (3..=n).flat_map(|k| subsets(n, k)).collect();
    let mut out = BTreeSet::new();
    fn go(
        i: usize,
        n: usize,
        cands: &[Vec<Point>],
        chosen: &mut Vec<Vec<Point>>,
        out: &mut BTreeSet<Vec<Vec<Point>>>,
    ) {
        if i == cands.len() {
            let s = LinearSpace::new(n, chosen).expect("pairwise meets are checked");
            out.insert(brute_canonical(&s));
            return;
        }
        go(i + 1, n, cands, chosen, out);
        let c = &cands[i];
        if chosen
            .iter()
            .all(|l| l.iter().filter(|p| c.contains(p)).count() <= 1)
        {
            chosen.push(c.clone());
            go(i + 1, n, cands, chosen, out);
            chosen.pop();
        }
    }
    go(0, n, &cands, &mut Vec::new(), &mut out);
    out
}

/// A random space on `n` points built by adding points one at a time,
/// each on a random set of pairwise disjoint existing lines.
pub fn random_space<R: Rng>(n: usize, rng: &mut R) -> LinearSpace {
    let mut s = LinearSpace::trivial(0);
    for _ in 0..n {
        let m = s.n_points();
        let mut all = s.all_lines();
        all.shuffle(rng);
        let mut chosen: Vec<Vec<Point>> = Vec::new();
        for l in all {
            if rng.gen_bool(0.4) && chosen.iter().all(|c| c.iter().all(|p| !l.contains(p))) {
                chosen.push(l);
            }
        }
        let mut lines: Vec<Vec<Point>> = s
            .lines()
            .iter()
            .filter(|l| !chosen.contains(l))
            .cloned()
            .collect();
        for mut c in chosen {
            c.push(m);
            lines.push(c);
        }
        s = LinearSpace::new(m + 1, &lines).expect("disjoint lines extend to a linear space");
    }
    s
}

/// A uniformly random relabelling.
pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<Point> {
    let mut p: Vec<Point> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// True iff `img` maps collinear triples exactly onto collinear triples.
pub fn preserves_collinearity(
    a: &LinearSpace,
    b: &LinearSpace,
    dom: &[Point],
    img: &[Point],
) -> bool {
    let (ca, cb) = (collinearity(a), collinearity(b));
    let k = dom.len();
    (0..k).all(|i| {
        (0..k).all(|j| (0..k).all(|l| ca[dom[i]][dom[j]][dom[l]] == cb[img[i]][img[j]][img[l]]))
    })
}
