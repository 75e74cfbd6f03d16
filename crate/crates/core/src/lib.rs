//! Paraxial two-slit wave optics with Bohmian streamlines in the position and
//! momentum representations, weak-measurement simulation, ray-matrix lens
//! systems and a harmonic-oscillator analogue.

pub mod error;
pub mod flow;
pub mod grid;
pub mod interp;
pub mod ontology_p;
pub mod ontology_x;
pub mod optics;
pub mod oscillator;
pub mod profile;
pub mod scene;
pub mod trajectory;
pub mod wavepacket;
pub mod weakmeas;

pub use error::{Error, Result};
pub use grid::{Representation, Spectral, WavefieldGrid};
pub use scene::SlitScene;
pub use profile::WeakValueProfile;
pub use trajectory::{Seed, Theory, TrajectoryBundle};
