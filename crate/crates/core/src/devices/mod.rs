//! Quantum devices: states, observables, channels, instruments.
//!
//! Channels use the Choi convention `J = Σ_{ij} |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` with the
//! input factor first, so `tr_out J = I_in` and `tr[Φ(ρ)A] = tr[J(ρᵀ ⊗ A)]`.

mod channel;
mod observable;
mod random;
mod state;

pub use channel::{
    choi_to_kraus, clock_unitaries, cloner_coefficient, compose_choi, conjugate_channel, ctrl_unitary_selfconjugate,
    diag_channel, isometry_marginals, kraus_to_choi, symmetric_projector, werner_cloner, Channel,
    Instrument, CLONER_DIM_CAP,
};
pub use observable::{
    binarize, fourier_matrix, fourier_pair, mix_with_trivial, mub_qubit, naimark_dilate,
    post_process, relabel, NaimarkDilation, Observable, StochasticMatrix, TrivialObservable,
};
pub use random::{
    ginibre, random_channel, random_povm, random_povm_with_rank, random_pure_state,
    random_state, random_stochastic, random_unitary,
};
pub use state::State;

/// `Φ(ρ)` for a channel and a state.
pub fn apply_channel(c: &Channel, rho: &State) -> crate::Result<State> {
    c.apply(rho)
}
