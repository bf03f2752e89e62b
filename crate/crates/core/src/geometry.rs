//! Finite graph metric, regions and the boundary/fattening constructions built on it.
//!
//! All distances are hop counts. Pairs in different connected components are at
//! distance [`INFINITE`].

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel for the distance between disconnected vertices.
pub const INFINITE: u32 = u32::MAX;

/// A finite simple graph with its precomputed all-pairs hop distance table.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    adjacency: Vec<Vec<usize>>,
    dist: Vec<Vec<u32>>,
}

impl Lattice {
    /// Builds a lattice from an undirected edge list. Duplicate edges are merged.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidLattice("lattice needs at least one vertex".into()));
        }
        let mut sets = vec![BTreeSet::new(); vertex_count];
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: v, count: vertex_count });
                }
            }
            if a == b {
                return Err(Error::InvalidLattice(format!("self-loop at vertex {a}")));
            }
            sets[a].insert(b);
            sets[b].insert(a);
        }
        let adjacency: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let dist = distance_table(&adjacency);
        Ok(Self { adjacency, dist })
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidLattice(format!("cycle needs at least 3 vertices, got {n}")));
        }
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        edges.push((n - 1, 0));
        Self::from_edges(n, &edges)
    }

    /// `width × height` grid, indexed column by column: vertex `x * height + y`.
    pub fn grid(width: usize, height: usize) -> Result<Self> {
        let idx = |x: usize, y: usize| x * height + y;
        let mut edges = Vec::new();
        for x in 0..width {
            for y in 0..height {
                if x + 1 < width {
                    edges.push((idx(x, y), idx(x + 1, y)));
                }
                if y + 1 < height {
                    edges.push((idx(x, y), idx(x, y + 1)));
                }
            }
        }
        Self::from_edges(width * height, &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, ns) in self.adjacency.iter().enumerate() {
            out.extend(ns.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    pub fn distance(&self, a: usize, b: usize) -> u32 {
        self.dist[a][b]
    }

    pub fn distance_table(&self) -> &[Vec<u32>] {
        &self.dist
    }

    /// `d(x, S) = min_{y ∈ S} d(x, y)`; infinite for empty `S`.
    pub fn distance_to_set(&self, x: usize, set: &Region) -> u32 {
        set.iter().map(|y| self.dist[x][y]).min().unwrap_or(INFINITE)
    }

    /// Distance between two sets.
    pub fn set_distance(&self, a: &Region, b: &Region) -> u32 {
        a.iter().map(|x| self.distance_to_set(x, b)).min().unwrap_or(INFINITE)
    }

    pub fn all(&self) -> Region {
        Region { members: (0..self.vertex_count()).collect() }
    }

    pub fn complement(&self, region: &Region) -> Region {
        Region { members: (0..self.vertex_count()).filter(|v| !region.contains(*v)).collect() }
    }
}

/// Breadth-first all-pairs hop distances.
pub fn distance_table(adjacency: &[Vec<usize>]) -> Vec<Vec<u32>> {
    let n = adjacency.len();
    let mut table = vec![vec![INFINITE; n]; n];
    let mut queue = VecDeque::new();
    for (source, row) in table.iter_mut().enumerate() {
        row[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let next = row[v] + 1;
            for &w in &adjacency[v] {
                if row[w] == INFINITE {
                    row[w] = next;
                    queue.push_back(w);
                }
            }
        }
    }
    table
}

/// A set of lattice vertices, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Region {
    members: Vec<usize>,
}

impl Region {
    /// Checks membership against `lattice`.
    pub fn new(lattice: &Lattice, vertices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let region = Self::from_vertices(vertices);
        if let Some(&v) = region.members.iter().find(|&&v| v >= lattice.vertex_count()) {
            return Err(Error::VertexOutOfRange { vertex: v, count: lattice.vertex_count() });
        }
        Ok(region)
    }

    /// Unchecked constructor; callers validate against a lattice separately.
    pub fn from_vertices(vertices: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = vertices.into_iter().collect();
        Self { members: set.into_iter().collect() }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.iter().any(|v| other.contains(v))
    }

    pub fn union(&self, other: &Region) -> Region {
        Self::from_vertices(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &Region) -> Region {
        Region { members: self.iter().filter(|&v| other.contains(v)).collect() }
    }

    pub fn difference(&self, other: &Region) -> Region {
        Region { members: self.iter().filter(|&v| !other.contains(v)).collect() }
    }
}

impl FromIterator<usize> for Region {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_vertices(iter)
    }
}

/// The sets derived from a region `X` at collar width `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySets {
    /// `∂X = {x ∈ X : d(x, Xᶜ) = 1}`
    pub inner: Region,
    /// `{x : d(x, X) ≤ R}`
    pub fattening: Region,
    /// `{x : d(x, Xᶜ) ≤ R}`
    pub co_collar: Region,
    /// fattening ∩ co-collar
    pub annulus: Region,
}

fn check_proper(lattice: &Lattice, x: &Region) -> Result<()> {
    if x.is_empty() || x.len() >= lattice.vertex_count() {
        return Err(Error::BoundaryUndefined);
    }
    if let Some(v) = x.iter().find(|&v| v >= lattice.vertex_count()) {
        return Err(Error::VertexOutOfRange { vertex: v, count: lattice.vertex_count() });
    }
    Ok(())
}

/// Vertices within distance `r` of `set` (distance to the empty set is infinite).
fn within(lattice: &Lattice, set: &Region, r: u32) -> Region {
    Region {
        members: (0..lattice.vertex_count())
            .filter(|&x| lattice.distance_to_set(x, set) <= r)
            .collect(),
    }
}

pub fn fattening(lattice: &Lattice, x: &Region, r: u32) -> Region {
    within(lattice, x, r)
}

pub fn co_collar(lattice: &Lattice, x: &Region, r: u32) -> Region {
    within(lattice, &lattice.complement(x), r)
}

/// The width-`2R` annulus `∂_R X` around the cut.
pub fn annulus(lattice: &Lattice, x: &Region, r: u32) -> Region {
    fattening(lattice, x, r).intersection(&co_collar(lattice, x, r))
}

pub fn inner_boundary(lattice: &Lattice, x: &Region) -> Region {
    let comp = lattice.complement(x);
    Region { members: x.iter().filter(|&v| lattice.distance_to_set(v, &comp) == 1).collect() }
}

pub fn boundary_sets(lattice: &Lattice, x: &Region, r: u32) -> Result<BoundarySets> {
    check_proper(lattice, x)?;
    let inner = inner_boundary(lattice, x);
    let fat = fattening(lattice, x, r);
    let collar = co_collar(lattice, x, r);
    let annulus = fat.intersection(&collar);
    Ok(BoundarySets { inner, fattening: fat, co_collar: collar, annulus })
}

/// Shell sizes `s_n = |X̲_n ∖ X̲_{n−1}|`, listed up to the last nonzero shell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShellProfile {
    pub sizes: Vec<usize>,
    pub monotone: bool,
}

impl ShellProfile {
    /// `s_n` for `n ≥ 1`; zero past the stored prefix.
    pub fn size(&self, n: usize) -> usize {
        if n == 0 {
            return 0;
        }
        self.sizes.get(n - 1).copied().unwrap_or(0)
    }
}

pub fn shell_profile(lattice: &Lattice, x: &Region) -> Result<ShellProfile> {
    check_proper(lattice, x)?;
    let comp = lattice.complement(x);
    let mut sizes: Vec<usize> = Vec::new();
    for v in x.iter() {
        let d = lattice.distance_to_set(v, &comp);
        if d == INFINITE {
            continue;
        }
        let n = d as usize;
        if sizes.len() < n {
            sizes.resize(n, 0);
        }
        sizes[n - 1] += 1;
    }
    let monotone = sizes.windows(2).all(|w| w[1] <= w[0]);
    Ok(ShellProfile { sizes, monotone })
}

/// Smallest `G` with `|∂_R X| ≤ G R^d |∂X|` for `1 ≤ R ≤ r_max`.
pub fn fat_boundary_constant(lattice: &Lattice, x: &Region, r_max: u32, dimension: u32) -> Result<f64> {
    if r_max < 1 {
        return Err(Error::InvalidArgument("fat-boundary R_max must be at least 1".into()));
    }
    if dimension < 1 {
        return Err(Error::InvalidArgument("spatial dimension must be at least 1".into()));
    }
    check_proper(lattice, x)?;
    let boundary = inner_boundary(lattice, x).len();
    if boundary == 0 {
        return Err(Error::InvalidArgument("region has empty inner boundary".into()));
    }
    let sizes: Vec<usize> = (1..=r_max).map(|r| annulus(lattice, x, r).len()).collect();
    Ok(fat_boundary_from_sizes(&sizes, boundary, dimension))
}

/// `max_R |∂_R X| / (R^d |∂X|)` where `annulus_sizes[R-1] = |∂_R X|`.
pub fn fat_boundary_from_sizes(annulus_sizes: &[usize], boundary: usize, dimension: u32) -> f64 {
    annulus_sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| size as f64 / (((i + 1) as f64).powi(dimension as i32) * boundary as f64))
        .fold(0.0, f64::max)
}

/// Whether `z` meets both `X` and `Λ ∖ X`.
pub fn is_crossing(z: &Region, x: &Region, volume: &Region) -> bool {
    z.intersects(x) && z.iter().any(|v| volume.contains(v) && !x.contains(v))
}

/// Whether `z` belongs to the surface family `M_R`: crossing and inside `∂_{⌊R/2⌋} X`.
pub fn in_surface_family(lattice: &Lattice, z: &Region, x: &Region, volume: &Region, r: u32) -> bool {
    is_crossing(z, x, volume) && z.is_subset(&annulus(lattice, x, r / 2))
}

/// Indices of the candidate supports that lie in `Λ` and cross the cut, optionally restricted.
pub fn crossing_sets(
    candidates: &[Region],
    x: &Region,
    volume: &Region,
    restrict_to: Option<&Region>,
) -> Vec<usize> {
    candidates
        .iter()
        .enumerate()
        .filter(|(_, z)| z.is_subset(volume) && is_crossing(z, x, volume))
        .filter(|(_, z)| restrict_to.map_or(true, |r| z.is_subset(r)))
        .map(|(i, _)| i)
        .collect()
}
