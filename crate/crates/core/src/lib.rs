//! gme-core: a functional RNS-CKKS kernel engine paired with a block-level
//! GPU performance model.
//!
//! The crate has two halves that meet in the middle:
//!
//! * The **functional half** ([`modarith`], [`params`], [`polyring`],
//!   [`heblocks`]) implements exact 64-bit residue arithmetic, negacyclic
//!   NTTs, RNS basis conversion, and the CKKS building blocks (encrypt,
//!   add, mult, rotate, rescale, key switch). Every operation reports an
//!   exact instruction/byte profile alongside its result.
//! * The **modeling half** ([`archmodel`], [`blockgraph`], [`labs`],
//!   [`blocksim`]) consumes those profiles: it describes a CU-grid GPU with
//!   optional cNoC/MOD/WMAC feature extensions, builds weighted block DAGs
//!   for FHE workloads, schedules them (greedy or locality-aware), and
//!   produces analytical timing/traffic reports.
//!
//! All randomness is funneled through seeded ChaCha streams ([`rng`]) so
//! every experiment is replayable bit-for-bit.

pub mod archmodel;
pub mod blockgraph;
pub mod blocksim;
pub mod error;
pub mod heblocks;
pub mod labs;
pub mod modarith;
pub mod params;
pub mod polyring;
pub mod rng;

pub use error::{Error, Result};
