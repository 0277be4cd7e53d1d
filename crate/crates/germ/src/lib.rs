//! Truncated changes of variable `f(x) = x + a_2 x^2 + ... + a_N x^N`
//! (composition modulo `x^{N+1}`) over Q or F_p, and what they are good
//! for:
//!
//! - [`fields`]: the exact coefficient arithmetic (arbitrary-precision
//!   rationals and prime fields).
//! - [`series`]: the group operations — composition, compositional
//!   inverse, conjugation.
//! - [`normal_form`]: exact Takens normal forms `x - alpha x^{r+1} +
//!   beta x^{2r+1}`, conjugacy testing with certified witnesses, and the
//!   asymptotic constants `(b, C, gamma)` those invariants predict for
//!   real iteration.
//! - [`pgroup`]: the finite groups Γ_p over F_p at precision p+2 — an
//!   exhaustive conjugacy census checked against the normal-form class
//!   list, and the resulting "few conjugacy classes" bounds.
//! - [`dynamics`]: double-precision orbit computation for parabolic maps
//!   like sin, estimators for the predicted decay constants, comparator
//!   germs, and sandwich-bound certification.

pub mod dynamics;
pub mod fields;
pub mod normal_form;
pub mod pgroup;
pub mod series;
