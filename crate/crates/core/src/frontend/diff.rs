use similar::{Algorithm, TextDiff};

/// Unified diff (`---`/`+++`/`@@`) between two versions of a file. Returns
/// an empty string when the texts are identical.
pub fn unified_diff(path: &str, old: &str, new: &str) -> String {
    if old == new {
        return String::new();
    }
    let diff = TextDiff::configure()
        .algorithm(Algorithm::Myers)
        .diff_lines(old, new);
    diff.unified_diff()
        .context_radius(3)
        .header(&format!("a/{path}"), &format!("b/{path}"))
        .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_texts_have_empty_diff() {
        assert!(unified_diff("m.py", "a\n", "a\n").is_empty());
    }

    #[test]
    fn changed_line_shows_up() {
        let d = unified_diff("m.py", "a\nb\nc\n", "a\nB\nc\n");
        assert!(d.starts_with("--- a/m.py\n+++ b/m.py\n@@"));
        assert!(d.contains("\n-b\n"));
        assert!(d.contains("\n+B\n"));
    }
}
