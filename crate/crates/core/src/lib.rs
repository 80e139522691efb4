pub mod codec;
pub mod desk;
pub mod engine;
pub mod error;
pub mod expr;
pub mod ghost;
pub mod gf;
pub mod hensel;
pub mod intpoly;
pub mod lab;
pub mod linalg;
pub mod ring;
pub mod ramified;
pub mod structural;
pub mod verify;
pub mod witt;

pub use error::{Error, Result};
pub use ring::{Elem, Ring};
pub use witt::WittVector;
