pub mod capacity;
pub mod codec;
pub mod exponent;
pub mod verify;
