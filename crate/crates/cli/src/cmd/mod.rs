// SPDX-License-Identifier: Apache-2.0

mod bloat;
mod gcn;
mod run;
mod smash;
mod sweep;
mod verify;

pub use self::bloat::{bloat, BloatRow};
pub use self::gcn::{gcn, GcnReport};
pub use self::run::{run, sim_options};
pub use self::smash::smash;
pub use self::sweep::{sweep, SweepRow};
pub use self::verify::{verify, VerifyReport};
