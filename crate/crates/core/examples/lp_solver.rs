//! The simplex solver on its own: a small diet problem with duals.

use medoid_lp::lp::{solve_lp, LinearProgram, Relation, Sense};

fn main() -> medoid_lp::Result<()> {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let oats = lp.add_var("oats", 0.6, 0.0, f64::INFINITY);
    let milk = lp.add_var("milk", 1.1, 0.0, f64::INFINITY);
    let eggs = lp.add_var("eggs", 1.7, 0.0, 4.0);
    lp.add_constraint("energy", [(oats, 4.0), (milk, 2.0), (eggs, 1.5)], Relation::Ge, 20.0);
    lp.add_constraint("protein", [(oats, 1.0), (milk, 3.0), (eggs, 6.0)], Relation::Ge, 18.0);
    lp.add_constraint("volume", [(oats, 1.0), (milk, 1.0)], Relation::Le, 8.0);

    let s = solve_lp(&lp)?;
    println!(
        "{:?} cost {:.4} in {} pivots",
        s.status, s.objective_value, s.iterations
    );
    for (name, x) in lp.names.iter().zip(&s.x) {
        println!("  {name:<5} {x:.4}");
    }
    for (c, y) in lp.constraints.iter().zip(&s.duals) {
        println!("  dual {:<8} {y:.4}", c.name);
    }
    println!("dual bound {:.4}", s.dual_objective(&lp));
    Ok(())
}
