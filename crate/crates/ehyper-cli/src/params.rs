//! Parameter files for `eval`: one JSON object, complex numbers as `[re, im]`.

use std::path::Path;

use ehyper::specfun::BasePair;
use ehyper::{Error, Result, C64};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
pub struct Cx(pub [f64; 2]);

impl From<Cx> for C64 {
    fn from(c: Cx) -> C64 {
        C64::new(c.0[0], c.0[1])
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Points {
    One(Cx),
    Many(Vec<Cx>),
}

impl Points {
    pub fn to_vec(&self) -> Vec<C64> {
        match self {
            Points::One(c) => vec![(*c).into()],
            Points::Many(v) => v.iter().map(|&c| c.into()).collect(),
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub p: Option<Cx>,
    pub q: Option<Cx>,
    pub t: Option<Vec<Cx>>,
    pub z: Option<Points>,
    pub n: Option<usize>,
    #[serde(default = "yes")]
    pub normalize_last: bool,
}

fn missing(field: &str) -> Error {
    Error::InvalidInput(format!("missing field \"{field}\""))
}

impl Params {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("parameters: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn p(&self) -> Result<C64> {
        self.p.map(C64::from).ok_or_else(|| missing("p"))
    }

    pub fn q(&self) -> Result<C64> {
        self.q.map(C64::from).ok_or_else(|| missing("q"))
    }

    pub fn base(&self) -> Result<BasePair> {
        BasePair::new(self.p()?, self.q()?)
    }

    pub fn t(&self) -> Result<Vec<C64>> {
        self.t.as_ref().map(|v| v.iter().map(|&c| c.into()).collect()).ok_or_else(|| missing("t"))
    }

    pub fn z(&self) -> Result<Vec<C64>> {
        self.z.as_ref().map(Points::to_vec).ok_or_else(|| missing("z"))
    }

    /// `n` from the file, and `m` from the length of `t`.
    pub fn nm(&self, default_n: usize) -> Result<(usize, i32)> {
        let n = self.n.unwrap_or(default_n);
        let len = self.t.as_ref().ok_or_else(|| missing("t"))?.len() as i64;
        let extra = len - 2 * n as i64 - 4;
        if extra < -2 || extra % 2 != 0 {
            return Err(Error::InvalidInput(format!("{len} entries of t do not fit n = {n} (need 2n+2m+4)")));
        }
        Ok((n, (extra / 2) as i32))
    }
}
