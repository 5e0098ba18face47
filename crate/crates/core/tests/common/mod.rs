// Independent oracles shared by the integration tests. Nothing here calls
// into the library's partition, spectrum or Smith-form code.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use echkit::curves::{CurveTopology, End, UCurveData};
use echkit::orbit::OrbitSet;
use echkit::RealScalar;

/// `(a + b·√d) / c` with `c > 0` and `d` not a perfect square (or `b = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QTheta {
    pub a: i64,
    pub b: i64,
    pub d: u64,
    pub c: i64,
}

fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// `⌊b·x·√d⌋` for integer `b·x`.
fn floor_sqrt_mul(bx: i128, d: u64) -> i128 {
    let sq = (bx.unsigned_abs()) * (bx.unsigned_abs()) * u128::from(d);
    let r = isqrt(sq) as i128;
    if bx >= 0 {
        r
    } else if r * r == sq as i128 {
        -r
    } else {
        -r - 1
    }
}

impl QTheta {
    pub fn rational(p: i64, q: i64) -> Self {
        QTheta { a: p, b: 0, d: 2, c: q }
    }

    pub fn is_rational(&self) -> bool {
        self.b == 0
    }

    pub fn scalar(&self) -> RealScalar {
        let s = if self.b == 0 {
            format!("({})/({})", self.a, self.c)
        } else {
            format!("(({}) + ({})*sqrt{})/({})", self.a, self.b, self.d, self.c)
        };
        RealScalar::parse(&s).unwrap()
    }

    pub fn value(&self) -> f64 {
        (self.a as f64 + self.b as f64 * (self.d as f64).sqrt()) / self.c as f64
    }

    /// `⌊xθ⌋`, exact.
    pub fn floor_mul(&self, x: i64) -> i64 {
        let x = i128::from(x);
        // ⌊N/c⌋ = ⌊⌊N⌋/c⌋ for N = x(a + b√d)
        let n = i128::from(self.a) * x + floor_sqrt_mul(i128::from(self.b) * x, self.d);
        n.div_euclid(i128::from(self.c)) as i64
    }

    /// `⌈xθ⌉`, exact.
    pub fn ceil_mul(&self, x: i64) -> i64 {
        if self.is_integer_mul(x) {
            self.floor_mul(x)
        } else {
            self.floor_mul(x) + 1
        }
    }

    pub fn is_integer_mul(&self, x: i64) -> bool {
        if self.b != 0 && x != 0 {
            return false;
        }
        (i128::from(self.a) * i128::from(x)).rem_euclid(i128::from(self.c)) == 0
    }
}

/// Extremal lattice path from `(0,0)` to `(m, end_y)` found by dynamic
/// programming over all lattice paths with monotone slopes. `upper` asks for
/// the concave path below `y = θx` of largest area; otherwise the convex path
/// above the line of smallest area. Returns the horizontal lengths of the
/// primitive segments, in path order.
pub fn brute_partition(theta: &QTheta, m: u32, upper: bool) -> Vec<u32> {
    let m = i64::from(m);
    let end_y = if upper { theta.floor_mul(m) } else { theta.ceil_mul(m) };
    // state: (x, y, previous step (dx, dy)); value: best twice-area and next step
    type Key = (i64, i64, i64, i64);
    let mut memo: HashMap<Key, Option<(i64, (i64, i64))>> = HashMap::new();

    fn slope_le(a: (i64, i64), b: (i64, i64)) -> bool {
        // a.1/a.0 <= b.1/b.0 with positive dx
        a.1 * b.0 <= b.1 * a.0
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        x: i64,
        y: i64,
        prev: (i64, i64),
        m: i64,
        end_y: i64,
        upper: bool,
        theta: &QTheta,
        memo: &mut HashMap<Key, Option<(i64, (i64, i64))>>,
    ) -> Option<(i64, (i64, i64))> {
        if x == m {
            return (y == end_y).then_some((0, (0, 0)));
        }
        let key = (x, y, prev.0, prev.1);
        if let Some(v) = memo.get(&key) {
            return *v;
        }
        let mut best: Option<(i64, (i64, i64))> = None;
        for nx in x + 1..=m {
            let dx = nx - x;
            // heights between the chord from the origin and the line
            let chord = end_y * nx;
            let (lo, hi) = if upper {
                (chord.div_euclid(m) + i64::from(chord.rem_euclid(m) != 0), theta.floor_mul(nx))
            } else {
                (theta.ceil_mul(nx), chord.div_euclid(m))
            };
            for ny in lo..=hi {
                let dy = ny - y;
                if num_gcd(dx, dy) != 1 {
                    continue;
                }
                let step = (dx, dy);
                if prev.0 != 0 {
                    let monotone = if upper { slope_le(step, prev) } else { slope_le(prev, step) };
                    if !monotone {
                        continue;
                    }
                }
                if let Some((rest, _)) = go(nx, ny, step, m, end_y, upper, theta, memo) {
                    let area = (y + ny) * dx + rest;
                    let better = match best {
                        None => true,
                        Some((b, _)) => {
                            if upper {
                                area > b
                            } else {
                                area < b
                            }
                        }
                    };
                    if better {
                        best = Some((area, step));
                    }
                }
            }
        }
        memo.insert(key, best);
        best
    }

    let mut parts = Vec::new();
    let (mut x, mut y, mut prev) = (0, 0, (0, 0));
    while x < m {
        let (_, step) = go(x, y, prev, m, end_y, upper, theta, &mut memo).expect("a lattice path exists");
        parts.push(step.0 as u32);
        x += step.0;
        y += step.1;
        prev = step;
    }
    parts
}

pub fn num_gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn sorted_desc(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

/// `⌊kθ⌋ + ⌈kθ⌉`.
pub fn cz_oracle(theta: &QTheta, k: i64) -> i64 {
    theta.floor_mul(k) + theta.ceil_mul(k)
}

/// Rank over `ℚ` by fraction-free elimination.
pub fn rational_rank(rows: &[Vec<i128>]) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let (a, b) = (m[rank][c], m[r][c]);
                let g = {
                    let (mut x, mut y) = (a.abs(), b.abs());
                    while y != 0 {
                        (x, y) = (y, x % y);
                    }
                    x
                };
                for k in 0..cols {
                    m[r][k] = m[r][k] * (a / g) - m[rank][k] * (b / g);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Kernel rank of `ℤⁿ → ℤ^g / ⟨relations⟩`, `e_i ↦ classes[i]`, over `ℚ`.
pub fn kernel_rank_oracle(classes: &[Vec<i64>], relations: &[Vec<i64>]) -> usize {
    let to128 = |v: &Vec<i64>| v.iter().map(|&x| i128::from(x)).collect::<Vec<_>>();
    let rel: Vec<Vec<i128>> = relations.iter().map(to128).collect();
    let mut both = rel.clone();
    both.extend(classes.iter().map(to128));
    classes.len() - (rational_rank(&both) - rational_rank(&rel))
}

/// `(m, n)` pairs of the `k` smallest values of `m·a + n·b`, merged from the
/// rows `n = 0, 1, …` with a heap.
pub fn heap_spectrum(a: f64, b: f64, k: usize) -> Vec<(u32, u32)> {
    #[derive(PartialEq)]
    struct Key(f64);
    impl Eq for Key {}
    impl PartialOrd for Key {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Key {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&o.0)
        }
    }
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((Key(0.0), 0u32, 0u32)));
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let Reverse((_, m, n)) = heap.pop().unwrap();
        out.push((m, n));
        // each row n is walked along m; a new row starts from m = 0
        heap.push(Reverse((Key(f64::from(m + 1) * a + f64::from(n) * b), m + 1, n)));
        if m == 0 {
            heap.push(Reverse((Key(f64::from(n + 1) * b), 0, n + 1)));
        }
    }
    out
}

/// Generates a random quadratic or rational rotation number.
pub fn random_theta(rng: &mut impl rand::Rng) -> QTheta {
    if rng.gen_bool(0.3) {
        let c = rng.gen_range(1..=12);
        QTheta::rational(rng.gen_range(-30..=30), c)
    } else {
        let d = [2u64, 3, 5, 6, 7, 10, 11, 13][rng.gen_range(0..8)];
        let mut b = rng.gen_range(-3..=3);
        if b == 0 {
            b = 1;
        }
        QTheta {
            a: rng.gen_range(-8..=8),
            b,
            d,
            c: rng.gen_range(1..=7),
        }
    }
}

/// All multisets of at most `max` ends drawn from `kinds`, as sorted lists.
fn end_multisets(kinds: &[End], max: usize) -> Vec<Vec<End>> {
    let mut out = vec![vec![]];
    let mut stack: Vec<(Vec<End>, usize)> = vec![(vec![], 0)];
    while let Some((cur, start)) = stack.pop() {
        if cur.len() == max {
            continue;
        }
        for i in start..kinds.len() {
            let mut next = cur.clone();
            next.push(kinds[i].clone());
            out.push(next.clone());
            stack.push((next, i));
        }
    }
    out
}

/// Every topology with genus ≤ `max_genus`, at least one end on each side,
/// ≤ `max_ends` ends in total, at orbits from `ids` with covers ≤ `max_mult`.
pub fn topologies(ids: &[&str], max_genus: u32, max_ends: usize, max_mult: u32) -> Vec<CurveTopology> {
    let kinds: Vec<End> = ids
        .iter()
        .flat_map(|id| (1..=max_mult).map(move |m| End::new(id, m)))
        .collect();
    let sides = end_multisets(&kinds, max_ends - 1);
    let mut out = Vec::new();
    for g in 0..=max_genus {
        for p in sides.iter().filter(|s| !s.is_empty()) {
            for n in sides.iter().filter(|s| !s.is_empty() && s.len() + p.len() <= max_ends) {
                out.push(CurveTopology::new(g, p.clone(), n.clone()));
            }
        }
    }
    out
}

/// Trivial-cylinder sets: each orbit of `ids` absent or covered once.
pub fn trivial_sets(ids: &[&str]) -> Vec<OrbitSet> {
    (0..1u32 << ids.len())
        .map(|mask| {
            let pairs: Vec<(&str, u32)> =
                ids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, id)| (*id, 1)).collect();
            OrbitSet::of(&pairs)
        })
        .collect()
}

fn count_at(ends: &[End], orbit: &str) -> usize {
    ends.iter().filter(|e| e.orbit == orbit).count()
}

fn orbits_in(ends: &[End]) -> Vec<&str> {
    let mut v: Vec<&str> = ends.iter().map(|e| e.orbit.as_str()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// `−χ + Σ (n⁺ − 1) + Σ (n⁻ − 1)`, counted from scratch.
pub fn j0_oracle(u: &UCurveData) -> i64 {
    let c = &u.nontrivial;
    let ends = (c.positive_ends.len() + c.negative_ends.len()) as i64;
    let chi = 2 - 2 * i64::from(c.genus) - ends;
    let mut j = -chi;
    for side in [&c.positive_ends, &c.negative_ends] {
        let mut ids: Vec<&str> = orbits_in(side);
        for (id, _) in u.trivial_cylinders.iter() {
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        for id in ids {
            let n = count_at(side, id) + usize::from(u.trivial_cylinders.multiplicity(id) > 0);
            j += n as i64 - 1;
        }
    }
    j
}

fn has_pair(ends: &[End]) -> bool {
    orbits_in(ends).iter().any(|id| count_at(ends, id) >= 2)
}

fn low_ok(c: &CurveTopology) -> bool {
    c.genus == 0
        && c.positive_ends.len() + c.negative_ends.len() <= 3
        && !has_pair(&c.positive_ends)
        && !has_pair(&c.negative_ends)
}

/// Conclusions forced by the value of J0, read straight off the topology:
/// `Some(true)` if they hold, `Some(false)` if violated, `None` if the value
/// forces nothing.
pub fn j0_conclusions(u: &UCurveData, j0: i64) -> Option<bool> {
    let c = &u.nontrivial;
    if j0 <= 1 {
        return Some(low_ok(c));
    }
    if j0 != 2 {
        return None;
    }
    let shares = [&c.positive_ends, &c.negative_ends]
        .iter()
        .any(|side| side.iter().any(|e| u.trivial_cylinders.multiplicity(&e.orbit) > 0));
    if shares && !low_ok(c) {
        return Some(false);
    }
    for side in [&c.positive_ends, &c.negative_ends] {
        if orbits_in(side).iter().any(|id| count_at(side, id) > 2) {
            return Some(false);
        }
    }
    let pp = has_pair(&c.positive_ends);
    let np = has_pair(&c.negative_ends);
    Some(!(pp && np) && (!pp || c.negative_ends.len() == 1) && (!np || c.positive_ends.len() == 1))
}

/// Type I iff no negative pair, type II iff no positive pair.
pub fn type_oracle(c: &CurveTopology) -> (bool, bool) {
    (!has_pair(&c.negative_ends), !has_pair(&c.positive_ends))
}
