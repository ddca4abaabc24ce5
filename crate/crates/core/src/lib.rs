//! Exact enumeration of holomorphic eta-quotients in `M_k(Γ_1(N))` for
//! levels coprime to 6, together with the existence and nonexistence
//! criteria for such quotients at squarefree level.
//!
//! - [`arithmetic`]: levels, divisors, `h_N`, the class `S`, Kronecker symbol
//! - [`etacore`]: exponent vectors, weight, congruences, character
//! - [`cusps`]: orders of vanishing and the cusp matrix `A_N`
//! - [`search`]: complete bounded enumeration and weak witnesses
//! - [`theorems`]: the decision procedure and its constructive pieces
//! - [`qexp`]: exact q-expansions
//! - [`cli`]: the `etaforge` command line

pub mod arithmetic;
pub mod cli;
pub mod cusps;
pub mod error;
pub mod etacore;
pub mod qexp;
pub mod search;
pub mod theorems;
pub mod wire;

pub use arithmetic::{h_of, in_s, kronecker, residue_set, Level, ResidueSet};
pub use cusps::{check_latin, cusp_matrix, latin_witness, orders_vector, vanishing_order, CuspMatrix, CuspOrderVector};
pub use error::{Error, Result};
pub use etacore::{CharacterKernel, EtaExponents};
pub use qexp::QSeries;
pub use search::{enumerate, rw_bound, weak_witness, Hit, SearchConfig, SearchMode, SearchReport};
pub use theorems::{decide, Decision, Verdict};
