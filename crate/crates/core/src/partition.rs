//! The spline-partition Markov process.
//!
//! Subsets are held extensionally: each leaf keeps the indices of the data
//! points it contains plus the (cut, side) path that defines it. The cut tree
//! records which leaf every cut split, so any point of the plane can be
//! routed to a unique leaf.
//!
//! Each unpaused leaf carries an exponential clock whose rate is the radius
//! of its points' smallest enclosing circle. Because the clocks are
//! memoryless, a transition draws one holding time from the summed rate and
//! then picks the leaf in proportion to its radius.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::cutgen::{sample_cut_within, BezierCut, CutGenConfig};
use crate::data::Dataset;
use crate::error::{Result, SmspError};
use crate::geometry::{smallest_enclosing_circle, Circle, Point, Side};

pub type PathStep = (usize, Side);

/// Where a tree edge leads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Child {
    Cut(usize),
    Leaf(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutNode {
    pub cut: Arc<BezierCut>,
    /// The tree edge this cut hangs from; `None` for the root cut.
    pub parent: Option<PathStep>,
    /// Indexed by [`Side::index`].
    pub children: [Child; 2],
}

/// Internal nodes of a partition; cuts are append-only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutTree {
    pub root: Child,
    pub nodes: Vec<CutNode>,
}

impl Default for CutTree {
    fn default() -> Self {
        CutTree {
            root: Child::Leaf(0),
            nodes: Vec::new(),
        }
    }
}

impl CutTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Descends from the root and returns the index of the leaf containing `p`.
    pub fn route(&self, p: Point) -> usize {
        let mut at = self.root;
        loop {
            match at {
                Child::Leaf(i) => return i,
                Child::Cut(c) => {
                    let node = &self.nodes[c];
                    at = node.children[node.cut.side(p).index()];
                }
            }
        }
    }

    /// The (cut, side) steps from the root down to cut `node`.
    pub fn path_to(&self, node: usize) -> Vec<PathStep> {
        let mut path = Vec::new();
        let mut at = self.nodes[node].parent;
        while let Some(step) = at {
            path.push(step);
            at = self.nodes[step.0].parent;
        }
        path.reverse();
        path
    }

    /// Whether routing `p` passes through cut `node`.
    pub fn reaches(&self, node: usize, p: Point) -> bool {
        let mut at = self.root;
        loop {
            match at {
                Child::Cut(c) if c == node => return true,
                Child::Cut(c) => {
                    let n = &self.nodes[c];
                    at = n.children[n.cut.side(p).index()];
                }
                Child::Leaf(_) => return false,
            }
        }
    }
}

/// True iff `p` is on the recorded side of every cut of `path`.
pub fn satisfies_path(tree: &CutTree, path: &[PathStep], p: Point) -> bool {
    path.iter().all(|&(c, side)| tree.nodes[c].cut.side(p) == side)
}

/// One block of the partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Subset {
    pub id: usize,
    pub constraint_path: Vec<PathStep>,
    pub member_indices: Vec<u32>,
    pub counts: Vec<u32>,
    pub circle: Circle,
    pub paused: bool,
    /// Set when no separating cut could be drawn for this leaf.
    pub cut_failed: bool,
}

impl Subset {
    fn build(id: usize, path: Vec<PathStep>, members: Vec<u32>, data: &Dataset) -> Result<Self> {
        let mut counts = vec![0u32; data.n_labels()];
        for &i in &members {
            counts[data.label(i as usize)] += 1;
        }
        let pts: Vec<Point> = members.iter().map(|&i| data.point(i as usize)).collect();
        let circle = smallest_enclosing_circle(&pts)?;
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        // coincident points with different labels can never be separated
        let cut_failed = !pure && circle.radius <= 0.0;
        Ok(Subset {
            id,
            constraint_path: path,
            member_indices: members,
            counts,
            circle,
            paused: pure || cut_failed || pts.len() < 2,
            cut_failed,
        })
    }

    pub fn radius(&self) -> f64 {
        self.circle.radius
    }

    pub fn len(&self) -> usize {
        self.member_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_indices.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionState {
    pub tree: CutTree,
    /// Reference-counted; resampled copies share unchanged leaves.
    pub leaves: Vec<Arc<Subset>>,
    pub elapsed: f64,
    next_id: usize,
}

/// Outcome of one call to [`advance`].
#[derive(Clone, Debug, PartialEq)]
pub enum Transition {
    Split {
        leaf: usize,
        above_leaf: usize,
        parent_counts: Vec<u32>,
        below_counts: Vec<u32>,
        above_counts: Vec<u32>,
    },
    /// The chosen leaf exhausted its proposal budget and was paused.
    CutFailed { leaf: usize },
    /// The next event would overshoot the budget; the clock now reads the budget.
    BudgetReached,
    /// Every leaf is paused.
    Extinct,
}

impl Transition {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Transition::BudgetReached | Transition::Extinct)
    }
}

/// A single leaf holding every data point.
pub fn init_partition(data: &Dataset) -> Result<PartitionState> {
    if data.is_empty() {
        return Err(SmspError::EmptyInput("cannot partition an empty dataset"));
    }
    let members: Vec<u32> = (0..data.len() as u32).collect();
    let root = Subset::build(0, Vec::new(), members, data)?;
    Ok(PartitionState {
        tree: CutTree::default(),
        leaves: vec![Arc::new(root)],
        elapsed: 0.0,
        next_id: 1,
    })
}

impl PartitionState {
    /// Sum of the radii of unpaused leaves.
    pub fn total_rate(&self) -> f64 {
        self.leaves.iter().filter(|l| !l.paused).map(|l| l.radius()).sum()
    }

    pub fn is_extinct(&self) -> bool {
        self.total_rate() <= 0.0
    }

    pub fn n_cuts(&self) -> usize {
        self.tree.len()
    }

    /// Picks an unpaused leaf with probability proportional to its radius.
    pub fn select_leaf<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let total = self.total_rate();
        if total <= 0.0 {
            return None;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last = None;
        for (i, leaf) in self.leaves.iter().enumerate() {
            if leaf.paused || leaf.radius() <= 0.0 {
                continue;
            }
            acc += leaf.radius();
            last = Some(i);
            if target < acc {
                return Some(i);
            }
        }
        last
    }

    /// Replaces leaf `leaf` by its two sides under `cut`. The below part keeps
    /// the leaf's slot; the above part is appended.
    pub fn split_leaf(&mut self, data: &Dataset, leaf: usize, cut: BezierCut) -> Result<Transition> {
        let parent = &self.leaves[leaf];
        let mut parts: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        for &i in &parent.member_indices {
            parts[cut.side(data.point(i as usize)).index()].push(i);
        }
        if parts[0].is_empty() || parts[1].is_empty() {
            return Err(SmspError::CountMismatch("cut does not separate the leaf".into()));
        }
        let node = self.tree.nodes.len();
        let position = parent.constraint_path.last().copied();
        let parent_counts = parent.counts.clone();
        let base_path = parent.constraint_path.clone();

        let [below_members, above_members] = parts;
        let mut below_path = base_path.clone();
        below_path.push((node, Side::Below));
        let mut above_path = base_path;
        above_path.push((node, Side::Above));
        let below = Subset::build(self.next_id, below_path, below_members, data)?;
        let above = Subset::build(self.next_id + 1, above_path, above_members, data)?;
        self.next_id += 2;

        let above_leaf = self.leaves.len();
        match position {
            None => self.tree.root = Child::Cut(node),
            Some((c, side)) => self.tree.nodes[c].children[side.index()] = Child::Cut(node),
        }
        self.tree.nodes.push(CutNode {
            cut: Arc::new(cut),
            parent: position,
            children: [Child::Leaf(leaf), Child::Leaf(above_leaf)],
        });
        let transition = Transition::Split {
            leaf,
            above_leaf,
            parent_counts,
            below_counts: below.counts.clone(),
            above_counts: above.counts.clone(),
        };
        self.leaves[leaf] = Arc::new(below);
        self.leaves.push(Arc::new(above));
        Ok(transition)
    }

    /// Checks the disjoint-cover, count and path invariants.
    pub fn check_invariants(&self, data: &Dataset) -> Result<()> {
        let mut seen = vec![false; data.len()];
        let mut total = vec![0u32; data.n_labels()];
        for (li, leaf) in self.leaves.iter().enumerate() {
            if leaf.counts.iter().sum::<u32>() as usize != leaf.member_indices.len() {
                return Err(SmspError::CountMismatch(format!("leaf {li} counts do not sum to its size")));
            }
            for &i in &leaf.member_indices {
                let i = i as usize;
                if std::mem::replace(&mut seen[i], true) {
                    return Err(SmspError::CountMismatch(format!("point {i} is in two leaves")));
                }
                if !satisfies_path(&self.tree, &leaf.constraint_path, data.point(i)) {
                    return Err(SmspError::CountMismatch(format!("point {i} violates leaf {li}'s path")));
                }
                if self.tree.route(data.point(i)) != li {
                    return Err(SmspError::CountMismatch(format!("point {i} routes away from leaf {li}")));
                }
            }
            for (t, c) in total.iter_mut().zip(&leaf.counts) {
                *t += c;
            }
            let pure = leaf.counts.iter().filter(|&&c| c > 0).count() <= 1;
            if leaf.paused != (pure || leaf.cut_failed || leaf.len() < 2) {
                return Err(SmspError::CountMismatch(format!("leaf {li} has a stale pause flag")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(SmspError::CountMismatch("some point is in no leaf".into()));
        }
        if total != data.histogram() {
            return Err(SmspError::CountMismatch("leaf counts do not add up to the label histogram".into()));
        }
        Ok(())
    }
}

/// One transition of the process under `budget`.
pub fn advance<R: Rng + ?Sized>(
    state: &mut PartitionState,
    data: &Dataset,
    budget: f64,
    cfg: &CutGenConfig,
    rng: &mut R,
) -> Result<Transition> {
    let rate = state.total_rate();
    if rate <= 0.0 {
        return Ok(Transition::Extinct);
    }
    let wait = Exp::new(rate).expect("positive rate").sample(rng);
    if state.elapsed + wait > budget {
        state.elapsed = budget;
        return Ok(Transition::BudgetReached);
    }
    let leaf = state.select_leaf(rng).expect("positive rate implies a live leaf");
    let pts: Vec<Point> = state.leaves[leaf]
        .member_indices
        .iter()
        .map(|&i| data.point(i as usize))
        .collect();
    let circle = state.leaves[leaf].circle;
    let transition = match sample_cut_within(&pts, &circle, cfg, rng) {
        Ok(cut) => state.split_leaf(data, leaf, cut)?,
        Err(SmspError::CutFailure { .. }) => {
            let l = Arc::make_mut(&mut state.leaves[leaf]);
            l.cut_failed = true;
            l.paused = true;
            Transition::CutFailed { leaf }
        }
        Err(e) => return Err(e),
    };
    state.elapsed += wait;
    Ok(transition)
}

/// Advances until the budget is spent, every leaf is paused, or `max_cuts`
/// cuts exist.
pub fn run_to_budget<R: Rng + ?Sized>(
    state: &mut PartitionState,
    data: &Dataset,
    budget: f64,
    max_cuts: Option<usize>,
    cfg: &CutGenConfig,
    rng: &mut R,
) -> Result<()> {
    loop {
        if max_cuts.is_some_and(|m| state.n_cuts() >= m) {
            return Ok(());
        }
        if advance(state, data, budget, cfg, rng)?.is_terminal() {
            return Ok(());
        }
    }
}

/// Index of the leaf containing `p`.
pub fn route_point(state: &PartitionState, p: Point) -> usize {
    state.tree.route(p)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::data::{make_yinyang, LabeledPoint};
    use crate::geometry::{BezierCurve, RotationFrame};

    fn dataset(pts: &[(f64, f64, u32)]) -> Dataset {
        let v: Vec<LabeledPoint> = pts.iter().map(|&(x, y, z)| LabeledPoint::new(x, y, z)).collect();
        Dataset::new(&v, None).unwrap()
    }

    fn vertical_line(x: f64) -> BezierCut {
        // rotating by -π/2 maps p to (y, -x); "above" means x < line
        let curve = BezierCurve::new(&[Point::new(-100.0, -x), Point::new(100.0, -x)]).unwrap();
        BezierCut::new(Point::ORIGIN, RotationFrame::new(-std::f64::consts::FRAC_PI_2), curve, 0.0).unwrap()
    }

    #[test]
    fn init_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts: Vec<(f64, f64, u32)> = (0..10).map(|i| (rng.random(), rng.random(), 1 + i % 2)).collect();
        let state = init_partition(&dataset(&pts)).unwrap();
        assert_eq!(state.leaves.len(), 1);
        assert_eq!(state.leaves[0].counts.iter().sum::<u32>(), 10);
        assert_eq!(state.elapsed, 0.0);
        assert!(!state.leaves[0].paused);

        let same = dataset(&[(0.0, 0.0, 2), (1.0, 0.0, 2), (0.0, 1.0, 2)]);
        assert!(init_partition(&same).unwrap().leaves[0].paused);

        let yy = Dataset::new(&make_yinyang(4000, 1), None).unwrap();
        let r = init_partition(&yy).unwrap().leaves[0].radius();
        assert!(r < 1.0 && r > 0.98, "radius {r}");

        let empty = Dataset::new(&[], Some(1)).unwrap();
        assert!(matches!(init_partition(&empty), Err(SmspError::EmptyInput(_))));
    }

    #[test]
    fn extinct_state_is_unchanged() {
        let data = dataset(&[(0.0, 0.0, 1), (1.0, 0.0, 1)]);
        let mut state = init_partition(&data).unwrap();
        let before = state.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = advance(&mut state, &data, f64::INFINITY, &CutGenConfig::default(), &mut rng).unwrap();
        assert_eq!(t, Transition::Extinct);
        assert_eq!(state, before);
    }

    #[test]
    fn zero_budget_keeps_initial_state() {
        let data = dataset(&[(0.0, 0.0, 1), (1.0, 0.0, 2), (0.5, 1.0, 1)]);
        let mut state = init_partition(&data).unwrap();
        let init = state.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        run_to_budget(&mut state, &data, 0.0, None, &CutGenConfig::default(), &mut rng).unwrap();
        assert_eq!(state, init);
    }

    #[test]
    fn lifetime_is_exponential_in_radius() {
        // radius 2
        let data = dataset(&[(-2.0, 0.0, 1), (2.0, 0.0, 2)]);
        let init = init_partition(&data).unwrap();
        assert!((init.total_rate() - 2.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cfg = CutGenConfig::default();
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let mut s = init.clone();
            let t = advance(&mut s, &data, f64::INFINITY, &cfg, &mut rng).unwrap();
            assert!(matches!(t, Transition::Split { .. }));
            sum += s.elapsed;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.02 * 0.5, "mean lifetime {mean}");
    }

    #[test]
    fn leaf_selection_is_proportional_to_radius() {
        // left pair spans 6 (radius 3), right pair spans 2 (radius 1)
        let data = dataset(&[(-10.0, 0.0, 1), (-4.0, 0.0, 2), (4.0, 0.0, 1), (6.0, 0.0, 2)]);
        let mut state = init_partition(&data).unwrap();
        state.split_leaf(&data, 0, vertical_line(0.0)).unwrap();
        let radii: Vec<f64> = state.leaves.iter().map(|l| l.radius()).collect();
        let big = radii.iter().position(|&r| (r - 3.0).abs() < 1e-12).unwrap();
        assert!((state.total_rate() - 4.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let hits = (0..n).filter(|_| state.select_leaf(&mut rng) == Some(big)).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.75).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn paused_leaves_are_never_touched() {
        let data = dataset(&[(-1.0, 0.0, 1), (-1.0, 1.0, 1), (1.0, 0.0, 2), (1.0, 1.0, 1)]);
        let mut state = init_partition(&data).unwrap();
        state.split_leaf(&data, 0, vertical_line(0.0)).unwrap();
        let pure = state.leaves.iter().position(|l| l.paused).unwrap();
        let frozen = state.leaves[pure].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        run_to_budget(&mut state, &data, f64::INFINITY, None, &CutGenConfig::default(), &mut rng).unwrap();
        assert_eq!(state.leaves[pure], frozen);
        state.check_invariants(&data).unwrap();
    }

    #[test]
    fn infinite_budget_ends_pure() {
        let pts = make_yinyang(600, 2);
        let data = Dataset::new(&pts, None).unwrap();
        let mut state = init_partition(&data).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        run_to_budget(&mut state, &data, f64::INFINITY, None, &CutGenConfig::default(), &mut rng).unwrap();
        assert!(state.is_extinct());
        for leaf in &state.leaves {
            let pure = leaf.counts.iter().filter(|&&c| c > 0).count() == 1;
            assert!(pure || leaf.cut_failed);
        }
        state.check_invariants(&data).unwrap();
        assert!(state.elapsed.is_finite());
    }

    #[test]
    fn invariants_hold_along_the_way() {
        let pts = make_yinyang(400, 8);
        let data = Dataset::new(&pts, None).unwrap();
        let mut state = init_partition(&data).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut last = 0.0;
        for _ in 0..60 {
            let t = advance(&mut state, &data, 50.0, &CutGenConfig::default(), &mut rng).unwrap();
            state.check_invariants(&data).unwrap();
            assert!(state.elapsed >= last);
            last = state.elapsed;
            if t.is_terminal() {
                break;
            }
        }
    }

    #[test]
    fn max_cuts_stops_early() {
        let data = Dataset::new(&make_yinyang(300, 4), None).unwrap();
        let mut state = init_partition(&data).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        run_to_budget(&mut state, &data, f64::INFINITY, Some(1), &CutGenConfig::default(), &mut rng).unwrap();
        assert_eq!(state.n_cuts(), 1);
        assert_eq!(state.leaves.len(), 2);
    }

    #[test]
    fn same_seed_same_tree() {
        let data = Dataset::new(&make_yinyang(500, 4), None).unwrap();
        let run = |seed| {
            let mut state = init_partition(&data).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_to_budget(&mut state, &data, 20.0, None, &CutGenConfig::default(), &mut rng).unwrap();
            state
        };
        let (a, b) = (run(17), run(17));
        assert_eq!(a.tree, b.tree);
        assert_eq!(a.elapsed.to_bits(), b.elapsed.to_bits());
        assert_ne!(run(18).tree, a.tree);
    }

    #[test]
    fn routing_matches_brute_force_paths() {
        let data = Dataset::new(&make_yinyang(800, 9), None).unwrap();
        let mut state = init_partition(&data).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        run_to_budget(&mut state, &data, 8.0, None, &CutGenConfig::default(), &mut rng).unwrap();
        assert!(state.n_cuts() > 5);
        for _ in 0..10_000 {
            let p = Point::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let hits: Vec<usize> = (0..state.leaves.len())
                .filter(|&i| satisfies_path(&state.tree, &state.leaves[i].constraint_path, p))
                .collect();
            assert_eq!(hits, vec![route_point(&state, p)]);
        }
        for i in 0..data.len() {
            let leaf = route_point(&state, data.point(i));
            assert!(state.leaves[leaf].member_indices.contains(&(i as u32)));
        }
    }

    #[test]
    fn path_to_and_reaches_agree() {
        let data = Dataset::new(&make_yinyang(500, 3), None).unwrap();
        let mut state = init_partition(&data).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        run_to_budget(&mut state, &data, 6.0, None, &CutGenConfig::default(), &mut rng).unwrap();
        for node in 0..state.tree.len() {
            let path = state.tree.path_to(node);
            for _ in 0..200 {
                let p = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                assert_eq!(state.tree.reaches(node, p), satisfies_path(&state.tree, &path, p));
            }
        }
    }
}
