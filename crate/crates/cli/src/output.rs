//! JSON with every float written to 17 significant digits, and small file helpers.

use std::io::{self, Write};
use std::path::Path;

use serde_json::ser::{Formatter, Serializer};
use serde_json::Value;

struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

pub fn to_json(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SeventeenDigits);
    serde::Serialize::serialize(v, &mut ser).expect("serializing a JSON value");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn write_file(path: &Path, contents: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, contents)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let v = serde_json::json!({"a": 0.1, "b": [1.0 / 3.0, -2e-300], "c": f64::NAN});
        let s = to_json(&v);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
        assert_eq!(back["b"][0].as_f64(), Some(1.0 / 3.0));
        assert_eq!(back["b"][1].as_f64(), Some(-2e-300));
        assert!(back["c"].is_null());
    }
}
