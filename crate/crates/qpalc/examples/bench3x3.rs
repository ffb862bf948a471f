use std::time::Instant;
use qpalc::semantics::CheckContext;
use qpalc::tiling::*;

fn main() {
    let red = Color::new("red");
    let blue = Color::new("blue");
    let t = |n: &Color, s: &Color, e: &Color, w: &Color| Tile {
        north: n.clone(), south: s.clone(), east: e.clone(), west: w.clone(),
    };
    let inst = TileInstance::new(
        vec![red.clone(), blue.clone()],
        vec![
            t(&red, &blue, &red, &blue),
            t(&red, &blue, &blue, &red),
            t(&blue, &red, &red, &blue),
            t(&blue, &red, &blue, &red),
        ],
        None,
    ).unwrap();
    let grid = brute_force_tile(&inst, 3, 3, None).unwrap().unwrap();
    let m = build_grid_model(&inst, &grid).unwrap();
    let ctx = CheckContext::new(m);
    for tag in [ComponentTag::Up, ComponentTag::Right, ComponentTag::RightUp, ComponentTag::UpRight, ComponentTag::NoChange] {
        let f = compile_component(&inst, tag, QuantifierFlavor::Apal).unwrap();
        let t0 = Instant::now();
        let mut all = true;
        for state in ctx.model().state_names().to_vec() {
            match ctx.check(&state, &f) {
                Ok(v) => { if !v { println!("  FALSE at {state}"); all = false; } }
                Err(e) => { println!("  ERROR at {state}: {e}"); all = false; }
            }
        }
        println!("{tag}: all={all} elapsed={:?}", t0.elapsed());
    }
}
