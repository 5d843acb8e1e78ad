//! Build a tiny model by hand and poke at the Bellman machinery: the two
//! operators, the residual, greedy policies and exact policy evaluation.
//!
//! ```bash
//! cargo run --example bellman_basics
//! ```

use mdpsolve::{MdpModel, Policy, ValueVector};

fn main() -> mdpsolve::Result<()> {
    // Two states, two actions. Action 0 stays put, action 1 swaps the
    // states; staying in state 1 is expensive.
    let model = MdpModel::build(
        2,
        2,
        0.5,
        &[
            (0, 0, 0, 1.0),
            (1, 0, 1, 1.0),
            (0, 1, 1, 1.0),
            (1, 1, 0, 1.0),
        ],
        vec![vec![0.0, 1.0], vec![2.0, 1.0]],
    )?;
    println!(
        "model: n={}, m={}, gamma={}, cost bound={}",
        model.num_states(),
        model.num_actions(),
        model.gamma(),
        model.cost_bound()
    );

    let v = ValueVector::zeros(2);
    let (tv, greedy) = model.optimal_update(&v)?;
    println!("optimality update of 0: {:?} with greedy policy {:?}", tv.values(), greedy.actions());

    let residual = model.bellman_residual(&v)?;
    println!("bellman residual at 0:  {:?}", residual.values());

    // Evaluate the greedy policy exactly and verify the fixed-point
    // property of the policy operator.
    let value = model.evaluate_policy(&greedy)?;
    let back = model.policy_update(&greedy, &value)?;
    println!("exact policy value:     {:?}", value.values());
    println!("one more policy sweep:  {:?}", back.values());

    // The gathered linear system behind that evaluation.
    let system = model.policy_system(&Policy::new(vec![0, 1]))?;
    println!(
        "policy system: rows of P = {:?}, rhs = {:?}",
        system.transition().to_dense(),
        system.rhs()
    );
    Ok(())
}
