use crate::error::{Error, Result};
use crate::grid::{Cell, GridMap, MoveGraph, MoveModel};
use crate::prioritized::{Instance, Robot};
use crate::rng::Rng;
use crate::scalar::Scalar;

const MAX_TRIES: usize = 1000;

#[derive(Debug, Clone, Copy)]
pub struct GeneratorOptions {
    /// Whether a robot may start on its own goal.
    pub allow_start_at_goal: bool,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self { allow_start_at_goal: true }
    }
}

/// Random instance with `n` robots: starts and goals drawn uniformly
/// without replacement from statically valid free cells, pairwise at
/// least `2r` apart, every robot able to reach its goal. Deterministic in
/// `seed`; robot ids are `0..n`.
pub fn generate_instance<S: Scalar>(
    map: &GridMap,
    n: usize,
    model: MoveModel<S>,
    seed: u64,
    opts: GeneratorOptions,
) -> Result<Instance<S>> {
    let candidates: Vec<Cell> = map.free_cells().filter(|&c| map.is_statically_valid(c, model.radius)).collect();
    if n > candidates.len() {
        return Err(Error::Generation(format!(
            "{n} robots requested but only {} valid cells",
            candidates.len()
        )));
    }
    let labels = MoveGraph::new(map, model).components(map);
    let mut rng = Rng::seed_from_u64(seed);
    let sep = model.separation();
    for _ in 0..MAX_TRIES {
        let Some(starts) = draw(&candidates, n, sep, &mut rng) else { continue };
        let Some(goals) = draw(&candidates, n, sep, &mut rng) else { continue };
        let ok = starts.iter().zip(&goals).all(|(&s, &g)| {
            labels[map.index(s)] == labels[map.index(g)] && (opts.allow_start_at_goal || s != g)
        });
        if !ok {
            continue;
        }
        let robots = starts
            .into_iter()
            .zip(goals)
            .enumerate()
            .map(|(id, (start, goal))| Robot { id, start, goal })
            .collect();
        return Instance::new(map.clone(), robots, model);
    }
    Err(Error::Generation(format!("no valid instance after {MAX_TRIES} draws")))
}

/// Partial Fisher-Yates over `candidates`, skipping cells closer than
/// `sep` to one already taken.
fn draw<S: Scalar>(candidates: &[Cell], n: usize, sep: S, rng: &mut Rng) -> Option<Vec<Cell>> {
    let mut pool = candidates.to_vec();
    let mut picked: Vec<Cell> = Vec::with_capacity(n);
    let mut i = 0;
    while picked.len() < n {
        if i >= pool.len() {
            return None;
        }
        let j = i + rng.below((pool.len() - i) as u64) as usize;
        pool.swap(i, j);
        let c = pool[i];
        i += 1;
        if picked.iter().all(|p| p.center::<S>().dist(c.center()) >= sep) {
            picked.push(c);
        }
    }
    Some(picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Connectivity;

    fn mm() -> MoveModel<f64> {
        MoveModel::new(Connectivity::Eight, 0.5 - 1e-6)
    }

    #[test]
    fn single_robot_on_small_map() {
        let map = GridMap::empty(4, 4);
        let inst = generate_instance(&map, 1, mm(), 5, GeneratorOptions::default()).unwrap();
        assert_eq!(inst.len(), 1);
    }

    #[test]
    fn too_many_robots() {
        let map = GridMap::empty(4, 4);
        assert!(generate_instance(&map, 17, mm(), 5, GeneratorOptions::default()).is_err());
    }

    #[test]
    fn fixed_seed_reproduces() {
        let map = GridMap::empty(8, 8);
        let a = generate_instance(&map, 20, mm(), 99, GeneratorOptions::default()).unwrap();
        let b = generate_instance(&map, 20, mm(), 99, GeneratorOptions::default()).unwrap();
        let c = generate_instance(&map, 20, mm(), 100, GeneratorOptions::default()).unwrap();
        assert_eq!(a.robots(), b.robots());
        assert_ne!(a.robots(), c.robots());
    }

    #[test]
    fn full_map_without_self_goals() {
        let map = GridMap::empty(3, 3);
        let opts = GeneratorOptions { allow_start_at_goal: false };
        let inst = generate_instance(&map, 9, mm(), 1, opts).unwrap();
        assert!(inst.robots().iter().all(|r| r.start != r.goal));
    }
}
