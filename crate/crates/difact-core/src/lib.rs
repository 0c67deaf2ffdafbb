//! Classical simulation of diffusion-based integer factorization.
//!
//! The crate factors an odd composite `N` by simulating discrete-time heat
//! diffusion (a half-lazy random walk) on a weighted Cayley graph built from
//! the powers `a^{±2^t} mod N`. The multiplicative order of an element is
//! read off from the limiting probability at the walk's start vertex, and a
//! nontrivial square root of 1 mod N then yields a divisor.
//!
//! The crate is `no_std` (with `alloc`); all IO, the CLI, and file formats
//! live in the companion `difact` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cayley;
pub mod diffusion;
pub mod factor;
pub mod numtheory;
pub mod orderfind;
