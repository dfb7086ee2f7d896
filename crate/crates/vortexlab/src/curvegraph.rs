//! Combinatorics of nodal marked curves: the graph of components and marked
//! points, tree/connecting bubble classification, depths, maximal connecting
//! chains, and the counting inequalities that bound bubble numbers.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// An irreducible component of a nodal curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub genus: u32,
    /// Contracted by stabilisation.
    pub bubble: bool,
}

/// A nodal marked curve as a combinatorial record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodalCurve {
    pub components: Vec<Component>,
    /// Owning component of each marked point.
    pub marked: Vec<usize>,
    /// Components of the two branches of each node (equal for self-nodes).
    pub nodes: Vec<(usize, usize)>,
}

impl NodalCurve {
    /// Number of special points (marked points and node branches) on each
    /// component.
    pub fn special_points(&self) -> Vec<usize> {
        let mut s = vec![0; self.components.len()];
        for &m in &self.marked {
            s[m] += 1;
        }
        for &(a, b) in &self.nodes {
            s[a] += 1;
            s[b] += 1;
        }
        s
    }

    /// Structural checks: indices in range, connected, bubbles of genus 0.
    pub fn validate(&self) -> Result<()> {
        let n = self.components.len();
        if n == 0 {
            return invalid("curve has no components");
        }
        if self.marked.iter().any(|&m| m >= n) || self.nodes.iter().any(|&(a, b)| a >= n || b >= n) {
            return invalid("component index out of range");
        }
        if let Some(i) = self.components.iter().position(|c| c.bubble && c.genus != 0) {
            return invalid(format!("bubble component {i} has positive genus"));
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(a, b) in &self.nodes {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return invalid("curve is disconnected");
        }
        Ok(())
    }

    /// Genus-0 principal components with fewer than three special points:
    /// by the stability convention these must be bubbles.
    pub fn unstable_principal_components(&self) -> Vec<usize> {
        let sp = self.special_points();
        (0..self.components.len())
            .filter(|&i| !self.components[i].bubble && self.components[i].genus == 0 && sp[i] < 3)
            .collect()
    }
}

/// Which components stabilisation contracts: genus-0 components with fewer
/// than three special points are contracted repeatedly (a two-pointed
/// component is replaced by a single node or marked point joining its two
/// neighbours).  The last surviving component is never contracted.
pub fn stabilization_bubbles(curve: &NodalCurve) -> Result<Vec<bool>> {
    curve.validate()?;
    let n = curve.components.len();
    // Endpoints are components (Some) or marked points (None).
    let mut edges: Vec<(usize, Option<usize>)> = curve.marked.iter().map(|&m| (m, None)).collect();
    edges.extend(curve.nodes.iter().map(|&(a, b)| (a, Some(b))));
    let mut alive = vec![true; n];
    let mut contracted = vec![false; n];
    loop {
        let live = alive.iter().filter(|a| **a).count();
        if live <= 1 {
            break;
        }
        let mut special = vec![0; n];
        for &(a, b) in &edges {
            special[a] += 1;
            if let Some(b) = b {
                special[b] += 1;
            }
        }
        let Some(c) = (0..n).find(|&c| alive[c] && curve.components[c].genus == 0 && special[c] < 3) else {
            break;
        };
        alive[c] = false;
        contracted[c] = true;
        let (touching, rest): (Vec<_>, Vec<_>) =
            edges.into_iter().partition(|&(a, b)| a == c || b == Some(c));
        edges = rest;
        // Other ends of the edges at c (a marked point is None).
        let ends: Vec<Option<usize>> =
            touching.iter().map(|&(a, b)| if a == c { b } else { Some(a) }).collect();
        if let [x, y] = ends[..] {
            match (x, y) {
                (Some(x), y) => edges.push((x, y)),
                (None, Some(y)) => edges.push((y, None)),
                (None, None) => {}
            }
        }
    }
    Ok(contracted)
}

/// Kind of a vertex of the bubble graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Principal,
    Bubble,
    Marked,
}

/// Graph whose vertices are the components followed by the marked points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BubbleGraph {
    pub kinds: Vec<VertexKind>,
    /// One edge per node (loops for self-nodes) and per marked point.
    pub edges: Vec<(usize, usize)>,
}

pub fn build_graph(curve: &NodalCurve) -> Result<BubbleGraph> {
    curve.validate()?;
    let nc = curve.components.len();
    let mut kinds: Vec<VertexKind> =
        curve.components.iter().map(|c| if c.bubble { VertexKind::Bubble } else { VertexKind::Principal }).collect();
    kinds.extend(std::iter::repeat(VertexKind::Marked).take(curve.marked.len()));
    let mut edges = curve.nodes.clone();
    edges.extend(curve.marked.iter().enumerate().map(|(k, &c)| (c, nc + k)));
    Ok(BubbleGraph { kinds, edges })
}

impl BubbleGraph {
    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    /// Degree counting a loop twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum()
    }

    /// Neighbours of `v` with multiplicity (a loop lists `v` once).
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == v { Some(b) } else if b == v { Some(a) } else { None })
            .collect()
    }

    /// A bubble with exactly one incident edge, which is not a loop.
    pub fn is_exterior(&self, v: usize) -> bool {
        self.kinds[v] == VertexKind::Bubble && self.degree(v) == 1
    }

    fn bubbles(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.kinds[v] == VertexKind::Bubble).collect()
    }
}

/// Largest number of bubble vertices the exhaustive subtree search accepts.
pub const MAX_BUBBLES: usize = 20;

/// Classification of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexClass {
    Principal,
    Marked,
    /// An exterior bubble (in particular a tree vertex).
    Exterior,
    Tree,
    Connecting,
}

impl VertexClass {
    pub fn is_tree(self) -> bool {
        matches!(self, VertexClass::Exterior | VertexClass::Tree)
    }
}

/// Whether the bubble vertices in `mask` (bits index `bubbles`) induce a tree
/// joined to the rest of the graph by exactly one edge.
fn is_witness(graph: &BubbleGraph, bubbles: &[usize], index: &[usize], mask: u32) -> bool {
    let inside = |v: usize| index[v] != usize::MAX && mask & (1 << index[v]) != 0;
    let size = mask.count_ones() as usize;
    let (mut internal, mut outgoing) = (0, 0);
    for &(a, b) in &graph.edges {
        match (inside(a), inside(b)) {
            (true, true) => {
                if a == b {
                    return false;
                }
                internal += 1;
            }
            (true, false) | (false, true) => {
                outgoing += 1;
                if outgoing > 1 {
                    return false;
                }
            }
            _ => {}
        }
    }
    if outgoing != 1 || internal != size - 1 {
        return false;
    }
    // Connected with |S| − 1 edges ⇔ tree.
    let start = bubbles[mask.trailing_zeros() as usize];
    let mut seen = 1u32 << index[start];
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for w in graph.neighbours(v) {
            if inside(w) && seen & (1 << index[w]) == 0 {
                seen |= 1 << index[w];
                stack.push(w);
            }
        }
    }
    seen == mask
}

/// Classifies every vertex by exhaustive search over saturated bubble-only
/// subtrees joined to the rest of the graph by a unique edge.
pub fn classify_vertices(graph: &BubbleGraph) -> Result<Vec<VertexClass>> {
    let bubbles = graph.bubbles();
    if bubbles.len() > MAX_BUBBLES {
        return invalid(format!("{} bubbles exceed the exhaustive-search limit {MAX_BUBBLES}", bubbles.len()));
    }
    let mut index = vec![usize::MAX; graph.len()];
    for (k, &b) in bubbles.iter().enumerate() {
        index[b] = k;
    }
    let mut tree_mask = 0u32;
    for mask in 1u32..(1u32 << bubbles.len()) {
        if mask & !tree_mask != 0 && is_witness(graph, &bubbles, &index, mask) {
            tree_mask |= mask;
        }
    }
    Ok((0..graph.len())
        .map(|v| match graph.kinds[v] {
            VertexKind::Principal => VertexClass::Principal,
            VertexKind::Marked => VertexClass::Marked,
            VertexKind::Bubble if graph.is_exterior(v) => VertexClass::Exterior,
            VertexKind::Bubble if tree_mask & (1 << index[v]) != 0 => VertexClass::Tree,
            VertexKind::Bubble => VertexClass::Connecting,
        })
        .collect())
}

/// Minimal length of a sequence of adjacent tree vertices from `v` to an
/// exterior vertex.
pub fn tree_depth(graph: &BubbleGraph, classes: &[VertexClass], v: usize) -> Result<usize> {
    if !classes.get(v).is_some_and(|c| c.is_tree()) {
        return invalid(format!("vertex {v} is not a tree vertex"));
    }
    let mut depth = vec![usize::MAX; graph.len()];
    depth[v] = 1;
    let mut queue = VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        if classes[x] == VertexClass::Exterior {
            return Ok(depth[x]);
        }
        for w in graph.neighbours(x) {
            if classes[w].is_tree() && depth[w] == usize::MAX {
                depth[w] = depth[x] + 1;
                queue.push_back(w);
            }
        }
    }
    Err(Error::Degenerate(format!("tree vertex {v} reaches no exterior vertex")))
}

/// Connected components of the subgraph induced by connecting vertices, each
/// ordered as a path from one end to the other.  Errors if a component is not
/// homeomorphic to a segment.
pub fn maximal_connecting_chains(graph: &BubbleGraph, classes: &[VertexClass]) -> Result<Vec<Vec<usize>>> {
    let connecting = |v: usize| classes[v] == VertexClass::Connecting;
    let mut seen = vec![false; graph.len()];
    let mut chains = Vec::new();
    for s in 0..graph.len() {
        if !connecting(s) || seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut k = 0;
        while k < comp.len() {
            for w in graph.neighbours(comp[k]) {
                if connecting(w) && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
            k += 1;
        }
        let set: BTreeSet<usize> = comp.iter().copied().collect();
        let internal: Vec<(usize, usize)> =
            graph.edges.iter().copied().filter(|(a, b)| set.contains(a) && set.contains(b)).collect();
        let inner_degree = |v: usize| internal.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum::<usize>();
        if internal.len() + 1 != comp.len() || comp.iter().any(|&v| inner_degree(v) > 2) {
            return Err(Error::Hypothesis(format!("connecting component {comp:?} is not a path")));
        }
        let mut path = vec![*comp.iter().find(|&&v| inner_degree(v) <= 1).expect("a path has an end")];
        while path.len() < comp.len() {
            let last = *path.last().expect("nonempty");
            let prev = if path.len() > 1 { Some(path[path.len() - 2]) } else { None };
            let next = graph.neighbours(last).into_iter().find(|&w| set.contains(&w) && Some(w) != prev && w != last);
            path.push(next.expect("path continues"));
        }
        chains.push(path);
    }
    Ok(chains)
}

/// Full classification of a curve as emitted by the `bubble-graph` command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub graph: BubbleGraph,
    pub classes: Vec<VertexClass>,
    /// Depth of each tree vertex (`None` otherwise).
    pub depths: Vec<Option<usize>>,
    pub chains: Vec<Vec<usize>>,
    pub unstable_principal: Vec<usize>,
}

pub fn classify_curve(curve: &NodalCurve) -> Result<Classification> {
    let graph = build_graph(curve)?;
    let classes = classify_vertices(&graph)?;
    let depths = (0..graph.len())
        .map(|v| if classes[v].is_tree() { tree_depth(&graph, &classes, v).map(Some) } else { Ok(None) })
        .collect::<Result<Vec<_>>>()?;
    let chains = maximal_connecting_chains(&graph, &classes)?;
    Ok(Classification { graph, classes, depths, chains, unstable_principal: curve.unstable_principal_components() })
}

/// Vertices outside a chain that are adjacent to one of its interior
/// vertices and are not tree vertices.
pub fn chain_neighbour_violations(graph: &BubbleGraph, classes: &[VertexClass], chain: &[usize]) -> Vec<usize> {
    let mut bad = BTreeSet::new();
    if chain.len() >= 3 {
        for &v in &chain[1..chain.len() - 1] {
            for w in graph.neighbours(v) {
                if !chain.contains(&w) && !classes[w].is_tree() {
                    bad.insert(w);
                }
            }
        }
    }
    bad.into_iter().collect()
}

/// Outcome of the unstable-vertex count on a tree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnstableBound {
    pub unstable: usize,
    pub bound: f64,
    pub ok: bool,
}

/// Counts vertices of degree ≤ 2 in a tree on `n` vertices and checks
/// `unstable ≥ (n + 2)/3`.
pub fn tree_unstable_bound_check(n: usize, edges: &[(usize, usize)]) -> Result<UnstableBound> {
    if n == 0 || edges.len() + 1 != n {
        return invalid("input is not a tree: need n ≥ 1 vertices and n − 1 edges");
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut degree = vec![0usize; n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return invalid("edge endpoint out of range");
        }
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return invalid("input is not a tree: it has a cycle");
        }
        parent[ra] = rb;
        degree[a] += 1;
        degree[b] += 1;
    }
    let unstable = degree.iter().filter(|&&d| d <= 2).count();
    let bound = (n as f64 + 2.0) / 3.0;
    Ok(UnstableBound { unstable, bound, ok: unstable as f64 >= bound })
}

/// Decodes a Prüfer sequence over `n = seq.len() + 2` labels into tree edges.
pub fn prufer_tree(seq: &[usize]) -> Vec<(usize, usize)> {
    let n = seq.len() + 2;
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// A uniformly random labelled tree on `n` vertices.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => vec![],
        _ => prufer_tree(&(0..n - 2).map(|_| rng.gen_range(0..n)).collect::<Vec<_>>()),
    }
}

fn canonical_rooted(adj: &[Vec<usize>], v: usize, parent: usize) -> String {
    let mut kids: Vec<String> =
        adj[v].iter().filter(|&&w| w != parent).map(|&w| canonical_rooted(adj, w, v)).collect();
    kids.sort();
    format!("({})", kids.concat())
}

fn canonical_tree(n: usize, edges: &[(usize, usize)]) -> String {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    (0..n).map(|r| canonical_rooted(&adj, r, usize::MAX)).min().expect("n ≥ 1")
}

/// All unlabelled trees on `n` vertices, one representative per isomorphism
/// class (grown leaf by leaf and deduplicated by canonical encoding).
pub fn all_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n == 0 {
        return vec![];
    }
    let mut level: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for size in 1..n {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for t in &level {
            for v in 0..size {
                let mut e = t.clone();
                e.push((v, size));
                if seen.insert(canonical_tree(size + 1, &e)) {
                    next.push(e);
                }
            }
        }
        level = next;
    }
    level
}

/// Holonomies at the two special points `y₋, y₊` of one bubble, as integer
/// multiples `m` of the exponent: `Hol = e^{2πmλ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BubbleHolonomy {
    pub minus: i64,
    pub plus: i64,
}

/// Holonomies along a chain of `k` connecting bubbles carrying residue `λ`:
/// every bubble has `e^{−2πλ}` at `y₋` and `e^{2πλ}` at `y₊`, so that the two
/// branches of every node joining consecutive bubbles have inverse holonomy.
pub fn chain_holonomy_propagation(k: usize) -> Result<Vec<BubbleHolonomy>> {
    if k == 0 {
        return invalid("chain must be nonempty");
    }
    // Node matching forces the pattern to repeat: the branch of bubble j at
    // its y₊ carries e^{2πλ}, so bubble j + 1 carries e^{−2πλ} at its y₋.
    Ok(vec![BubbleHolonomy { minus: -1, plus: 1 }; k])
}

impl BubbleHolonomy {
    /// Numerical holonomies for `λ = i·s` (`e^{2πλ} = e^{2πis}`).
    pub fn eval(&self, s: f64) -> (crate::scalar::C64, crate::scalar::C64) {
        let e = |m: i64| crate::scalar::C64::from_polar(1.0, std::f64::consts::TAU * s * m as f64);
        (e(self.minus), e(self.plus))
    }
}

/// Exponent products across the nodes joining consecutive bubbles (each must
/// be 0, i.e. holonomy 1).
pub fn node_matching_products(chain: &[BubbleHolonomy]) -> Vec<i64> {
    chain.windows(2).map(|w| w[0].plus + w[1].minus).collect()
}

/// A random connected curve with up to `max_components` components, random
/// self-nodes and marked points, and bubble flags set by stabilisation.
pub fn random_curve(rng: &mut impl Rng, max_components: usize) -> NodalCurve {
    let n = rng.gen_range(1..=max_components.max(1));
    let mut nodes: Vec<(usize, usize)> = random_tree(rng, n);
    for _ in 0..rng.gen_range(0..=n / 3) {
        let a = rng.gen_range(0..n);
        let b = if rng.gen_bool(0.3) { a } else { rng.gen_range(0..n) };
        nodes.push((a, b));
    }
    let marked: Vec<usize> = (0..rng.gen_range(0..=n.min(6))).map(|_| rng.gen_range(0..n)).collect();
    let components = (0..n).map(|_| Component { genus: if rng.gen_bool(0.15) { 1 } else { 0 }, bubble: false }).collect();
    let mut curve = NodalCurve { components, marked, nodes };
    let flags = stabilization_bubbles(&curve).expect("generated curve is valid");
    for (c, f) in curve.components.iter_mut().zip(flags) {
        c.bubble = f;
    }
    curve
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(bubble: bool) -> Component {
        Component { genus: 0, bubble }
    }

    #[test]
    fn star_and_loop() {
        let c = NodalCurve { components: vec![comp(false)], marked: vec![0, 0, 0], nodes: vec![] };
        let g = build_graph(&c).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.degree(0), 3);
        let l = NodalCurve { components: vec![Component { genus: 1, bubble: false }], marked: vec![0], nodes: vec![(0, 0)] };
        let g = build_graph(&l).unwrap();
        assert!(g.edges.contains(&(0, 0)));
        assert_eq!(g.degree(0), 3);
    }

    #[test]
    fn tree_counts() {
        let counts: Vec<usize> = (1..=10).map(|n| all_trees(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 6, 11, 23, 47, 106]);
    }

    #[test]
    fn stabilization_contracts_chains() {
        // P — B — B — Q with P, Q carrying enough marked points.
        let c = NodalCurve {
            components: vec![comp(false); 4],
            marked: vec![0, 0, 3, 3],
            nodes: vec![(0, 1), (1, 2), (2, 3)],
        };
        assert_eq!(stabilization_bubbles(&c).unwrap(), vec![false, true, true, false]);
    }

    #[test]
    fn holonomy_chain() {
        let h = chain_holonomy_propagation(1).unwrap();
        assert_eq!(h, vec![BubbleHolonomy { minus: -1, plus: 1 }]);
        let (a, b) = h[0].eval(0.0);
        assert_eq!((a.re, b.re), (1.0, 1.0));
        assert!(node_matching_products(&chain_holonomy_propagation(3).unwrap()).iter().all(|&p| p == 0));
    }
}
