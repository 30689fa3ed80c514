//! Comment header written at the top of every output file.

use std::fmt::Write as _;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `# arcconf <version>`, the command, each config entry, and the seed.
/// Nothing run-specific such as timestamps or worker counts goes in, so
/// reruns stay byte-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub command: String,
    pub entries: Vec<(String, String)>,
    pub seed: Option<u64>,
}

impl Header {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), entries: Vec::new(), seed: None }
    }

    pub fn entry(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn render(&self) -> String {
        let mut out = format!("# arcconf {VERSION}\n# command: {}\n", self.command);
        for (k, v) in &self.entries {
            let _ = writeln!(out, "# {k} = {v}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed = {seed}");
        }
        out
    }
}
