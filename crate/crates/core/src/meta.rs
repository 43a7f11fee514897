//! `#meta` header lines shared by the text model formats.

use crate::Metadata;

pub(crate) const PREFIX: &str = "#meta";

/// `#meta<TAB>k=v<TAB>k=v...`, keys in sorted order.
pub(crate) fn format_line(meta: &Metadata) -> String {
    let mut line = String::from(PREFIX);
    for (k, v) in meta {
        line.push('\t');
        line.push_str(k);
        line.push('=');
        line.push_str(v);
    }
    line
}

pub(crate) fn parse_line(line: &str) -> Option<Metadata> {
    let rest = line.strip_prefix(PREFIX)?;
    Some(
        rest.split('\t')
            .filter(|f| !f.is_empty())
            .filter_map(|f| f.split_once('='))
            .map(|(k, v)| (k.to_owned(), v.to_owned()))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut m = Metadata::new();
        m.insert("seed".into(), "7".into());
        m.insert("config_hash".into(), "abc".into());
        let line = format_line(&m);
        assert_eq!(line, "#meta\tconfig_hash=abc\tseed=7");
        assert_eq!(parse_line(&line).unwrap(), m);
        assert_eq!(parse_line("#meta").unwrap(), Metadata::new());
        assert!(parse_line("#marginals").is_none());
    }
}
