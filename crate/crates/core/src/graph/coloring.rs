use std::collections::VecDeque;

use super::Graph;
use crate::error::{Error, Result};

/// Largest graph [`exact_color`] will search.
pub const MAX_EXACT_COLOR_VERTICES: usize = 128;

/// A vertex coloring with colors `0..num_colors`, each used at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<usize>,
    num_colors: usize,
}

impl Coloring {
    /// Renumbers arbitrary color labels to `0..c` in order of first appearance.
    pub fn from_colors(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let colors: Vec<usize> = raw
            .iter()
            .map(|c| {
                let next = map.len();
                *map.entry(*c).or_insert(next)
            })
            .collect();
        Coloring {
            colors,
            num_colors: map.len(),
        }
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn color(&self, v: usize) -> usize {
        self.colors[v]
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    /// Vertices of each color class, in vertex order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_colors];
        for (v, &c) in self.colors.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn is_proper(&self, g: &Graph) -> bool {
        self.colors.len() == g.n()
            && g.edges().iter().all(|&(u, v)| self.colors[u] != self.colors[v])
    }
}

/// An odd cycle, listed as consecutive vertices (the last is adjacent to the first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddCycle(pub Vec<usize>);

/// Colors `g` with two colors, or returns an odd cycle proving it impossible.
pub fn two_color(g: &Graph) -> std::result::Result<Coloring, OddCycle> {
    let vertices: Vec<usize> = (0..g.n()).collect();
    match two_color_subset(g, &vertices) {
        Ok(side) => Ok(Coloring::from_colors(&side)),
        Err(cycle) => Err(cycle),
    }
}

/// BFS 2-coloring of the subgraph induced by `vertices`; colors are indexed
/// like `vertices`.
fn two_color_subset(g: &Graph, vertices: &[usize]) -> std::result::Result<Vec<usize>, OddCycle> {
    let n = g.n();
    let mut pos = vec![usize::MAX; n];
    for (a, &v) in vertices.iter().enumerate() {
        pos[v] = a;
    }
    let m = vertices.len();
    let mut side = vec![usize::MAX; m];
    let mut parent = vec![usize::MAX; m];
    let mut depth = vec![0usize; m];
    for start in 0..m {
        if side[start] != usize::MAX {
            continue;
        }
        side[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for w in g.neighbors(vertices[a]) {
                let b = pos[w];
                if b == usize::MAX {
                    continue;
                }
                if side[b] == usize::MAX {
                    side[b] = 1 - side[a];
                    parent[b] = a;
                    depth[b] = depth[a] + 1;
                    queue.push_back(b);
                } else if side[b] == side[a] {
                    return Err(OddCycle(
                        odd_cycle(a, b, &parent, &depth)
                            .into_iter()
                            .map(|x| vertices[x])
                            .collect(),
                    ));
                }
            }
        }
    }
    Ok(side)
}

/// Tree paths from both ends of a same-parity edge up to their common ancestor.
fn odd_cycle(u: usize, v: usize, parent: &[usize], depth: &[usize]) -> Vec<usize> {
    let (mut a, mut b) = (u, v);
    let (mut left, mut right) = (vec![a], vec![b]);
    while depth[a] > depth[b] {
        a = parent[a];
        left.push(a);
    }
    while depth[b] > depth[a] {
        b = parent[b];
        right.push(b);
    }
    while a != b {
        a = parent[a];
        b = parent[b];
        left.push(a);
        right.push(b);
    }
    right.pop();
    right.reverse();
    left.extend(right);
    left
}

/// First-fit coloring in vertex order.
pub fn greedy_color(g: &Graph) -> Coloring {
    let vertices: Vec<usize> = (0..g.n()).collect();
    Coloring::from_colors(&greedy_subset(g, &vertices))
}

fn greedy_subset(g: &Graph, vertices: &[usize]) -> Vec<usize> {
    let mut color = vec![usize::MAX; g.n()];
    let mut out = Vec::with_capacity(vertices.len());
    for &v in vertices {
        let taken: Vec<usize> = g
            .neighbors(v)
            .map(|w| color[w])
            .filter(|&c| c != usize::MAX)
            .collect();
        let c = (0..).find(|c| !taken.contains(c)).expect("unbounded");
        color[v] = c;
        out.push(c);
    }
    out
}

/// A proper coloring with at most `k` colors, if one exists (exhaustive
/// DSATUR-ordered backtracking).
pub fn exact_color(g: &Graph, k: usize) -> Result<Option<Coloring>> {
    let n = g.n();
    if n > MAX_EXACT_COLOR_VERTICES {
        return Err(Error::capacity(format!(
            "exact coloring is limited to {MAX_EXACT_COLOR_VERTICES} vertices, got {n}"
        )));
    }
    if n == 0 {
        return Ok(Some(Coloring::from_colors(&[])));
    }
    if k == 0 {
        return Ok(None);
    }
    let mut colors = vec![usize::MAX; n];
    let found = backtrack(g, k, &mut colors, 0, 0);
    Ok(found.then(|| Coloring::from_colors(&colors)))
}

fn backtrack(g: &Graph, k: usize, colors: &mut [usize], done: usize, used: usize) -> bool {
    let n = g.n();
    if done == n {
        return true;
    }
    // most constrained uncolored vertex: saturation, then degree, then index
    let mut pick = None;
    let mut best = (0usize, 0usize);
    for v in 0..n {
        if colors[v] != usize::MAX {
            continue;
        }
        let mut seen = 0u128;
        let mut uncolored_deg = 0;
        for w in g.neighbors(v) {
            if colors[w] == usize::MAX {
                uncolored_deg += 1;
            } else {
                seen |= 1 << colors[w];
            }
        }
        let key = (seen.count_ones() as usize, uncolored_deg);
        if pick.is_none() || key > best {
            pick = Some(v);
            best = key;
        }
    }
    let v = pick.expect("an uncolored vertex remains");
    // a fresh color is interchangeable with any other fresh color
    for c in 0..k.min(used + 1) {
        if g.neighbors(v).any(|w| colors[w] == c) {
            continue;
        }
        colors[v] = c;
        if backtrack(g, k, colors, done + 1, used.max(c + 1)) {
            return true;
        }
        colors[v] = usize::MAX;
    }
    false
}

/// The coloring exponent realized by [`approx_color`] for `k`-colorable input:
/// it uses `O(n^e)` colors with `e = 1 - 1/(k-1)`, and `0` for `k <= 2`.
pub fn realized_exponent(k: usize) -> f64 {
    if k <= 2 {
        0.0
    } else {
        1.0 - 1.0 / (k as f64 - 1.0)
    }
}

fn degree_threshold(n: usize, k: usize) -> usize {
    ((n as f64).powf(realized_exponent(k)).ceil() as usize).max(1)
}

/// Upper bound on the colors [`approx_color`] uses on a `k`-colorable graph
/// with `n` vertices. For `k = 3` this is at most `3 * ceil(sqrt(n))`.
pub fn coloring_budget(n: usize, k: usize) -> usize {
    let raw = if k <= 2 {
        2
    } else {
        // neighborhoods may be any size up to n, and the bound is not monotone
        let t = degree_threshold(n, k);
        let inner = (1..=n).map(|m| coloring_budget(m, k - 1)).max().unwrap_or(0);
        (n / t) * inner + t
    };
    raw.min(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxColoring {
    pub coloring: Coloring,
    /// Set when the graph was found not to be `k`-colorable along the way;
    /// the coloring is still proper but the budget may be exceeded.
    pub promise_violated: bool,
    pub budget: usize,
    pub exponent: f64,
}

/// Colors a graph promised to be `k`-colorable using few colors.
///
/// `k = 2` is exact BFS. For `k >= 3`, while some vertex has at least
/// `t = ceil(n^(1 - 1/(k-1)))` remaining neighbors, its neighborhood (which
/// is `(k-1)`-colorable) is colored recursively with fresh colors and removed;
/// what is left has degree below `t` and is colored first-fit.
pub fn approx_color(g: &Graph, k: usize) -> Result<ApproxColoring> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let n = g.n();
    let mut colors = vec![usize::MAX; n];
    let mut next = 0;
    let mut violated = false;
    let vertices: Vec<usize> = (0..n).collect();
    if k == 1 {
        violated = g.edge_count() > 0;
        let raw = if violated { greedy_subset(g, &vertices) } else { vec![0; n] };
        return Ok(ApproxColoring {
            coloring: Coloring::from_colors(&raw),
            promise_violated: violated,
            budget: n.min(1),
            exponent: 0.0,
        });
    }
    recurse(g, &vertices, k, &mut colors, &mut next, &mut violated);
    let coloring = Coloring::from_colors(&colors);
    let budget = coloring_budget(n, k);
    if coloring.num_colors() > budget {
        violated = true;
    }
    debug_assert!(coloring.is_proper(g));
    Ok(ApproxColoring {
        coloring,
        promise_violated: violated,
        budget,
        exponent: realized_exponent(k),
    })
}

fn recurse(
    g: &Graph,
    vertices: &[usize],
    k: usize,
    colors: &mut [usize],
    next: &mut usize,
    violated: &mut bool,
) {
    if vertices.is_empty() {
        return;
    }
    if k <= 2 {
        let local = match two_color_subset(g, vertices) {
            Ok(side) if k == 2 => side,
            Ok(side) if side.iter().all(|&s| s == 0) => side,
            _ => {
                *violated = true;
                greedy_subset(g, vertices)
            }
        };
        let used = local.iter().max().map_or(0, |m| m + 1);
        for (a, &v) in vertices.iter().enumerate() {
            colors[v] = *next + local[a];
        }
        *next += used;
        return;
    }
    let t = degree_threshold(vertices.len(), k);
    let mut active = vec![false; g.n()];
    for &v in vertices {
        active[v] = true;
    }
    loop {
        let high = vertices.iter().copied().find(|&v| {
            active[v] && g.neighbors(v).filter(|&w| active[w]).count() >= t
        });
        let Some(v) = high else { break };
        let hood: Vec<usize> = g.neighbors(v).filter(|&w| active[w]).collect();
        recurse(g, &hood, k - 1, colors, next, violated);
        for w in hood {
            active[w] = false;
        }
    }
    let rest: Vec<usize> = vertices.iter().copied().filter(|&v| active[v]).collect();
    let local = greedy_subset(g, &rest);
    let used = local.iter().max().map_or(0, |m| m + 1);
    for (a, &v) in rest.iter().enumerate() {
        colors[v] = *next + local[a];
    }
    *next += used;
}
