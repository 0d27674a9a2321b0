//! Symbolic moment propagation through polynomial dynamics.
//!
//! A system `b_{t+1} = g(b_t)` with polynomial `g` maps every moment
//! `E[b_{t+1}^xi]` to a linear combination of moments at `t`. Factoring
//! those over a dependence graph and recursing on whatever is not yet known
//! yields a finite closed recursion ([`MomentDynamics`]), evaluated step by
//! step by [`propagate`].

mod dubins;
mod dynamics;
mod graph;
mod poly;
mod propagate;
mod system;

pub use dubins::{
    dubins_system, dubins_system_constant_speed, DubinsInputs, DubinsState, DubinsSystem,
    DUBINS_EDGES, DUBINS_VARS,
};
pub use dynamics::{
    derive_from_targets, derive_position_moments, expand, position_targets, ExprTerm, Expansion,
    Expression, MomentDynamics, MomentRef, DEFAULT_EXPANSION_CAP, MAX_MOMENT_DEGREE,
};
pub use graph::{factor_moment, DependenceGraph};
pub use poly::{MultiIndex, Poly, VarId};
pub use propagate::{propagate, BaseMoments, MomentState};
pub use system::{substitute_dynamics, PolySystem};

/// Variable ids of the Dubins system.
pub mod dubins_vars {
    pub use super::dubins::{C, C_W, S, S_W, V, W_V, X, Y};
}

/// Position moment recursion of the stochastic Dubins car up to `order`.
pub fn dubins_position_dynamics(order: usize) -> crate::Result<MomentDynamics> {
    let d = dubins_system();
    derive_position_moments(&d.system, &d.graph, order)
}

/// Expression listing of the Dubins position recursion.
pub fn dump_treering(order: usize) -> crate::Result<String> {
    if !(1..=8).contains(&order) {
        return Err(crate::Error::Validation(format!(
            "unsupported TreeRing order {order}"
        )));
    }
    let dyn_ = dubins_position_dynamics(order)?;
    Ok(format!(
        "# stochastic Dubins position moments up to order {order}\n{}",
        dyn_.dump()
    ))
}
