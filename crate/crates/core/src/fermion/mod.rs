//! A finite Gross-Neveu toy model: `N` colors of Grassmann fields on a
//! periodic ring of sites, interaction `(λ/N) Σ_x (Σ_a ψ̄_a ψ_a)²`.
//!
//! Convention: `⟨ψ_a(x) ψ̄_b(y)⟩ = δ_ab C(x, y)`, so that a product of `m`
//! pairs `ψ̄_u ψ_v` integrates to `(-1)^m det[C(v_r, u_s)]`.

mod bruteforce;
mod coloring;
mod gram;
mod model;
mod radius;
mod tree;

pub use bruteforce::{grassmann_partition_series, pressure_series_bruteforce};
pub use coloring::{coloring_count, coloring_count_for, valid_arrows, ColoringRule};
pub use gram::{gram_bound_check, weakening_square_root, GramFactorization, GramReport, SquareRoot};
pub use model::{ExponentSign, GrassmannModel, GrassmannModelFile};
pub use radius::{radius_probe, two_site_model, RadiusProbe, RadiusRow};
pub use tree::{
    loop_determinant, pressure_series_tree, pressure_series_tree_with, sign_audit, ColorSummation, LoopMatrix,
    SignAuditRow, TreeDecoration,
};
