//! File formats, a thread-pool executor and the command-line front end for
//! [`arcconf_core`].

pub mod cli;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod header;
pub mod modelfile;
pub mod network;

pub use error::{Error, Result};
pub use exec::Threaded;
