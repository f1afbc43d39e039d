//! Hash containers with a fixed seed, so iteration order (and with it every
//! floating-point summation order) is the same on every run.

use std::hash::{BuildHasherDefault, DefaultHasher};

pub type HashMap<K, V> = std::collections::HashMap<K, V, BuildHasherDefault<DefaultHasher>>;
