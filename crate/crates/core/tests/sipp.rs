mod common;

use common::*;
use prioplan::geometry::Point;
use prioplan::grid::{agent_free_shortest_path_len, Cell, Connectivity, GridMap, MoveModel};
use prioplan::harness::validate::validate_solution;
use prioplan::prioritized::{Instance, Robot};
use prioplan::rng::Rng;
use prioplan::sipp::{build_safe_intervals, sipp_search, DynamicObstacle, Trajectory, Waypoint};
use proptest::prelude::*;

fn four(r: f64) -> MoveModel<f64> {
    MoveModel::new(Connectivity::Four, r)
}

fn plan(c: &OracleCase, obstacles: &[Trajectory<f64>], mm: &MoveModel<f64>) -> Option<Trajectory<f64>> {
    let obs: Vec<DynamicObstacle<f64>> = obstacles.iter().cloned().map(DynamicObstacle::Trajectory).collect();
    let table = build_safe_intervals(&c.map, &obs, mm);
    sipp_search(c.start, c.goal, &table, &obs, &c.map, mm)
}

fn sound(c: &OracleCase, traj: &Trajectory<f64>, mm: &MoveModel<f64>) {
    // obstacles may run into each other, so check one pair at a time
    let cell = |p: Point<f64>| Cell::new(p.x as usize, p.y as usize);
    let me = Robot { id: 0, start: c.start, goal: c.goal };
    let mine = Trajectory::new(0, traj.waypoints.clone());
    for o in &c.obstacles {
        let other = Robot { id: o.robot, start: cell(o.start()), goal: cell(o.goal()) };
        let inst = Instance::new(c.map.clone(), vec![me, other], *mm).unwrap();
        if let Err(v) = validate_solution(&inst, &[mine.clone(), o.clone()]) {
            panic!("planned trajectory rejected: {v}");
        }
    }
}

#[test]
fn never_later_than_the_integer_lattice_and_converges_on_a_fine_one() {
    let mm = four(0.49);
    let sep = mm.separation();
    for seed in 0..150u64 {
        let c = oracle_case(seed);
        let sampled: Vec<SampledObstacle> = c.obstacles.iter().map(SampledObstacle::from_trajectory).collect();
        let got = plan(&c, &c.obstacles, &mm);
        let coarse = lattice_astar(&c.map, c.start, c.goal, &sampled, sep, 1, 64.0);
        assert_eq!(got.is_some(), coarse.is_some(), "seed {seed}");
        let (Some(traj), Some(coarse)) = (got, coarse) else { continue };
        sound(&c, &traj, &mm);
        let t = traj.arrival();
        assert!(t <= coarse + 1e-5, "seed {seed}: {t} after lattice {coarse}");
        if t < coarse {
            let fine = lattice_astar(&c.map, c.start, c.goal, &sampled, sep, 50, 64.0).unwrap();
            assert!(fine >= t - 1e-5 && fine <= t + 0.02 + 1e-9, "seed {seed}: {t} vs {fine}");
        }
    }
}

#[test]
fn row_with_a_crossing_matches_the_fine_lattice() {
    // r = 0.25, the crossing robot covers (2, 0) during (1.5, 2.5)
    let map = GridMap::empty(5, 1);
    let mm = four(0.25);
    let crossing = Trajectory::new(
        1,
        vec![Waypoint::new(Point::new(2.0, -2.0), 0.0), Waypoint::new(Point::new(2.0, 2.0), 4.0)],
    );
    let obs = vec![DynamicObstacle::Trajectory(crossing.clone())];
    let table = build_safe_intervals(&map, &obs, &mm);
    let unsafe_cell = table.get(2);
    assert!(!unsafe_cell.contains(1.6) && !unsafe_cell.contains(2.4));
    assert!(unsafe_cell.contains(1.4) && unsafe_cell.contains(2.6));
    let t = sipp_search(Cell::new(0, 0), Cell::new(4, 0), &table, &obs, &map, &mm).unwrap().arrival();

    let sampled = [SampledObstacle::from_trajectory(&crossing)];
    let lattice = |steps| lattice_astar(&map, Cell::new(0, 0), Cell::new(4, 0), &sampled, 0.5, steps, 40.0).unwrap();
    let mut agreed = false;
    for steps in [4, 20] {
        let l = lattice(steps);
        assert!(t <= l + 1e-5);
        if l - t <= 1.0 / steps as f64 + 1e-9 {
            agreed = true;
            break;
        }
    }
    assert!(agreed, "sipp {t}");
}

#[test]
fn without_obstacles_cost_is_the_agent_free_optimum() {
    let mut rng = Rng::seed_from_u64(17);
    for k in 0..60 {
        let map = random_map(&mut rng, 8, 8, 0.2);
        let mm: MoveModel<f64> = MoveModel::new(if k % 2 == 0 { Connectivity::Eight } else { Connectivity::Four }, 0.499999);
        let (Some(a), Some(b)) = (random_free_cell(&mut rng, &map), random_free_cell(&mut rng, &map)) else {
            continue;
        };
        let table = build_safe_intervals(&map, &[], &mm);
        let got = sipp_search(a, b, &table, &[], &map, &mm).map(|t| t.arrival());
        let want = agent_free_shortest_path_len(a, b, &map, &mm).unwrap();
        match (got, want) {
            (Some(g), Some(w)) => assert!((g - w).abs() < 1e-9, "{g} vs {w}"),
            (None, None) => {}
            other => panic!("{other:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adding_an_obstacle_never_helps(seed in 0u64..100_000) {
        let c = oracle_case(seed);
        prop_assume!(!c.obstacles.is_empty());
        let mm = four(0.49);
        let fewer = plan(&c, &c.obstacles[..c.obstacles.len() - 1], &mm).map(|t| t.arrival());
        let more = plan(&c, &c.obstacles, &mm).map(|t| t.arrival());
        match (fewer, more) {
            (Some(a), Some(b)) => prop_assert!(b >= a - 1e-9),
            (None, Some(_)) => prop_assert!(false, "an obstacle made a path appear"),
            _ => {}
        }
    }
}
