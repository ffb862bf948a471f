//! Grid-truncation fixtures: closure, partition, restriction and quantifier
//! behavior on the models built from tilings, each checked against an
//! independent oracle where one exists.

use std::collections::BTreeSet;

use qpalc::bisim::{compute_partition, characteristic_formula, ClosureConstraint};
use qpalc::formula::{agent_set, parse, Formula};
use qpalc::kripke::{AgentId, Model, StateSet};
use qpalc::semantics::CheckContext;
use qpalc::tiling::{
    brute_force_tile, build_grid_model, compile_component, grid_state_name, ComponentTag, Color,
    GridTruncation, QuantifierFlavor, Tile, TileInstance,
};

fn checker_instance() -> TileInstance {
    let red = Color::new("red");
    let blue = Color::new("blue");
    let t = |n: &Color, s: &Color, e: &Color, w: &Color| Tile {
        north: n.clone(),
        south: s.clone(),
        east: e.clone(),
        west: w.clone(),
    };
    TileInstance::new(
        vec![red.clone(), blue.clone()],
        vec![
            t(&red, &blue, &red, &blue),
            t(&red, &blue, &blue, &red),
            t(&blue, &red, &red, &blue),
            t(&blue, &red, &blue, &red),
        ],
        None,
    )
    .unwrap()
}

fn checker_model(w: usize, h: usize) -> Model {
    let inst = checker_instance();
    let grid = brute_force_tile(&inst, w, h, None).unwrap().unwrap();
    build_grid_model(&inst, &grid).unwrap()
}

/// Uniform-color instance whose second tile is the designated one, so any
/// star placement tiles.
fn striped_instance() -> TileInstance {
    let grey = Color::new("grey");
    let tile = Tile {
        north: grey.clone(),
        south: grey.clone(),
        east: grey.clone(),
        west: grey.clone(),
    };
    TileInstance::new(vec![grey], vec![tile.clone(), tile], Some(1)).unwrap()
}

/// A 3x3 instance with nine pairwise distinct tiles (fresh color per edge)
/// and the unique tiling placing tile `3j + i` at `(i, j)`.
fn nine_distinct() -> (TileInstance, GridTruncation) {
    let color = |name: String| Color::new(name);
    let mut colors = Vec::new();
    let mut fresh = |name: String| {
        let c = color(name);
        if !colors.contains(&c) {
            colors.push(c.clone());
        }
        c
    };
    let mut tiles = Vec::new();
    for j in 0..3usize {
        for i in 0..3usize {
            let west = if i == 0 {
                fresh(format!("bw_{j}"))
            } else {
                fresh(format!("h_{}_{j}", i - 1))
            };
            let east = if i == 2 {
                fresh(format!("be_{j}"))
            } else {
                fresh(format!("h_{i}_{j}"))
            };
            let south = if j == 0 {
                fresh(format!("bs_{i}"))
            } else {
                fresh(format!("v_{i}_{}", j - 1))
            };
            let north = if j == 2 {
                fresh(format!("bn_{i}"))
            } else {
                fresh(format!("v_{i}_{j}"))
            };
            tiles.push(Tile {
                north,
                south,
                east,
                west,
            });
        }
    }
    let instance = TileInstance::new(colors, tiles, None).unwrap();
    let grid = GridTruncation {
        width: 3,
        height: 3,
        assignment: (0..3).map(|j| (0..3).map(|i| 3 * j + i).collect()).collect(),
    };
    grid.validate(&instance).unwrap();
    (instance, grid)
}

/// Reachability oracle: Floyd-Warshall closure over the explicit union of
/// the agents' relations.
fn closure_oracle(m: &Model, group: &[&str], from: &str) -> BTreeSet<u32> {
    let n = m.n_states();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for agent in group {
        let ai = m.agent_ix(&AgentId::new(*agent)).unwrap();
        for block in m.partition(ai).blocks() {
            for &a in block {
                for &b in block {
                    reach[a as usize][b as usize] = true;
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let s = m.state_ix(from).unwrap() as usize;
    (0..n as u32).filter(|&t| reach[s][t as usize]).collect()
}

#[test]
fn group_closure_covers_3x3_grid() {
    let m = checker_model(3, 3);
    assert_eq!(m.n_states(), 45);
    let group = agent_set(["h", "v", "s"]);
    let start = grid_state_name(0, 0, 'e');
    let closure = m.group_closure(&group, &start).unwrap();
    assert_eq!(closure.len(), 45);
    let oracle = closure_oracle(&m, &["h", "v", "s"], &start);
    assert_eq!(closure.iter().collect::<BTreeSet<_>>(), oracle);
    // Monotonicity in the group.
    let smaller = m.group_closure(&agent_set(["v", "s"]), &start).unwrap();
    assert!(smaller.is_subset_of(&closure));
    assert_eq!(
        smaller.iter().collect::<BTreeSet<_>>(),
        closure_oracle(&m, &["v", "s"], &start)
    );
    // {v,s} from the first column reaches exactly the first column.
    assert_eq!(smaller.len(), 3 * 5);
}

/// Naive coinductive oracle: a pair matrix refined until stable.
fn naive_bisim_blocks(m: &Model) -> Vec<Vec<u32>> {
    let n = m.n_states();
    let mut equiv = vec![vec![true; n]; n];
    for a in 0..n as u32 {
        for b in 0..n as u32 {
            let same_val = (0..m.props().len())
                .all(|p| m.prop_extension(p).contains(a) == m.prop_extension(p).contains(b));
            equiv[a as usize][b as usize] = same_val;
        }
    }
    loop {
        let mut changed = false;
        for a in 0..n as u32 {
            for b in 0..n as u32 {
                if !equiv[a as usize][b as usize] {
                    continue;
                }
                let ok = (0..m.agents().len()).all(|ai| {
                    let ca = m.partition(ai).class_of(a);
                    let cb = m.partition(ai).class_of(b);
                    ca.iter().all(|&u| cb.iter().any(|&w| equiv[u as usize][w as usize]))
                        && cb.iter().all(|&w| ca.iter().any(|&u| equiv[u as usize][w as usize]))
                });
                if !ok {
                    equiv[a as usize][b as usize] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    let mut assigned = vec![false; n];
    for s in 0..n as u32 {
        if assigned[s as usize] {
            continue;
        }
        let block: Vec<u32> = (s..n as u32).filter(|&t| equiv[s as usize][t as usize]).collect();
        for &t in &block {
            assigned[t as usize] = true;
        }
        blocks.push(block);
    }
    blocks
}

#[test]
fn nine_distinct_tiles_give_singleton_blocks() {
    let (inst, grid) = nine_distinct();
    let m = build_grid_model(&inst, &grid).unwrap();
    assert_eq!(m.n_states(), 45);
    let p = compute_partition(&m);
    assert_eq!(p.blocks().len(), 45);
    assert_eq!(naive_bisim_blocks(&m).len(), 45);
}

#[test]
fn partition_matches_naive_oracle_on_checker() {
    let m = checker_model(2, 3);
    let p = compute_partition(&m);
    let naive = naive_bisim_blocks(&m);
    assert_eq!(p.blocks(), naive.as_slice());
}

#[test]
fn row_deletion_extension_on_6x6() {
    let inst = striped_instance();
    let rows: BTreeSet<usize> = [0, 2, 3].into();
    let grid = brute_force_tile(&inst, 6, 6, Some(&rows)).unwrap().unwrap();
    let m = build_grid_model(&inst, &grid).unwrap();
    assert_eq!(m.n_states(), 180);
    let ctx = CheckContext::new(m);
    let keep = ctx.extension(&parse("C {h,s} ~pstar").unwrap()).unwrap();
    // Exactly the states on rows without the designated tile survive.
    for j in 0..6 {
        for i in 0..6 {
            for pos in ['n', 's', 'e', 'w', 'c'] {
                let ix = ctx.model().state_ix(&grid_state_name(i, j, pos)).unwrap();
                assert_eq!(keep.contains(ix), !rows.contains(&j), "({i},{j},{pos})");
            }
        }
    }
    assert_eq!(keep.len(), 90);
    // Blocks only shrink under restriction: v-links never jump the gap.
    let updated = ctx.update(&parse("C {h,s} ~pstar").unwrap()).unwrap();
    let vm = updated.model();
    let vi = vm.agent_ix(&AgentId::new("v")).unwrap();
    for block in vm.partition(vi).blocks() {
        assert!(block.len() <= 2);
        if block.len() == 2 {
            let a = vm.state_name(block[0]);
            let b = vm.state_name(block[1]);
            // Parse rows back out of the names s_i_j_p.
            let row = |name: &str| name.split('_').nth(2).unwrap().parse::<usize>().unwrap();
            assert_eq!(row(a) + 1, row(b));
        }
    }
}

#[test]
fn characteristic_formula_for_one_row() {
    let m = checker_model(3, 3);
    let p = compute_partition(&m);
    // Row 1: an {h,s}-closed, block-closed set.
    let mut row = StateSet::empty(m.n_states());
    for i in 0..3 {
        for pos in ['n', 's', 'e', 'w', 'c'] {
            row.insert(m.state_ix(&grid_state_name(i, 1, pos)).unwrap());
        }
    }
    let constraint = ClosureConstraint::of(["h", "s"]);
    let psi = characteristic_formula(&m, &p, &row, &constraint).unwrap();
    // The formula is a conjunction of one K per constrained agent.
    fn collect_conjuncts(f: &Formula, out: &mut Vec<Formula>) {
        match f {
            Formula::And(a, b) => {
                out.push((**a).clone());
                collect_conjuncts(b, out);
            }
            other => out.push(other.clone()),
        }
    }
    let mut parts = Vec::new();
    collect_conjuncts(&psi, &mut parts);
    assert_eq!(parts.len(), 2);
    assert!(matches!(&parts[0], Formula::Know(a, _) if a.as_str() == "h"));
    assert!(matches!(&parts[1], Formula::Know(a, _) if a.as_str() == "s"));
    // And its extension is exactly the row.
    let ctx = CheckContext::new(m);
    let ext = ctx.extension(&psi).unwrap();
    assert_eq!(ext, row);
}

#[test]
fn quantified_conjuncts_hold_on_2x2() {
    let inst = checker_instance();
    let grid = brute_force_tile(&inst, 2, 2, None).unwrap().unwrap();
    let m = build_grid_model(&inst, &grid).unwrap();
    let ctx = CheckContext::new(m);
    for tag in [
        ComponentTag::Up,
        ComponentTag::Right,
        ComponentTag::RightUp,
        ComponentTag::UpRight,
        ComponentTag::NoChange,
    ] {
        let f = compile_component(&inst, tag, QuantifierFlavor::Apal).unwrap();
        for state in ctx.model().state_names().to_vec() {
            assert!(ctx.check(&state, &f).unwrap(), "{tag} at {state}");
        }
    }
}
