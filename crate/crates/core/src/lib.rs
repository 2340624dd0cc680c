#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod numerics;
pub mod scattering;
pub mod bands;
pub mod thermo;
pub mod oracle;
