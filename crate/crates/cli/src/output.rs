use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use qwscatter::{Coin, C64};

/// Fixed 17-significant-digit formatting used for every float column.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex(c: C64) -> String {
    format!("{}{:+.16e}i", num(c.re), c.im)
}

/// CSV text with `#`-prefixed metadata lines.
#[derive(Debug, Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(command: &str) -> Self {
        let mut csv = Csv::default();
        csv.comment(&format!(
            "qwscatter {command} v{}",
            env!("CARGO_PKG_VERSION")
        ));
        csv
    }

    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.buf, "# {line}");
    }

    pub fn coin(&mut self, coin: &Coin) {
        self.comment(&format!(
            "coin a={} b={} c={} d={}",
            complex(coin.a),
            complex(coin.b),
            complex(coin.c),
            complex(coin.d)
        ));
        self.comment("arcs (x;L)=2x (x;R)=2x+1; z=sqrt(Delta)e^{ik}=e^{-i xi}; arg sqrt(Delta) in (-pi/2,pi/2]");
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        let line: Vec<&str> = cells.iter().map(|c| c.as_ref()).collect();
        self.buf.push_str(&line.join(","));
        self.buf.push('\n');
    }

    #[cfg(test)]
    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn emit(&self, out: Option<&Path>) -> io::Result<()> {
        match out {
            Some(p) => fs::write(p, &self.buf),
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(self.buf.as_bytes())?;
                lock.flush()
            }
        }
    }
}
