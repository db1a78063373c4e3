//! Lattice bases and the algebra the covering pipeline needs: Gram-Schmidt
//! projections, determinants, directional bases under sublattice and
//! superlattice operations, and coset generation.

pub mod basis;
pub mod ops;

pub use basis::{BasisJson, LatticeBasis};
pub use ops::{
    adjoin, directional_basis, is_prime, mod_p_cosets, prime_in_bertrand_interval, SublatticeSpec,
};
