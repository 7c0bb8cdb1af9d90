/// Normalizes abstract and title text.
///
/// Rules, applied in one left-to-right pass:
/// - `$...$` math fences are replaced by their inner text;
/// - `\command` (a backslash followed by letters) is dropped, other escapes
///   `\x` become `x`, except `$`, `\`, `{` and `}` which are dropped;
/// - braces and unmatched `$` are removed;
/// - control characters other than whitespace are removed;
/// - whitespace runs collapse to one space and the result is trimmed.
///
/// The output never contains `$`, `\`, `{` or `}`, which makes the function
/// idempotent.
pub fn clean_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let chars: Vec<char> = raw.chars().collect();
    let mut i = 0;
    let mut pending_space = false;
    let push = |out: &mut String, c: char, pending_space: &mut bool| {
        if c.is_whitespace() {
            *pending_space = true;
        } else if !c.is_control() && !matches!(c, '$' | '\\' | '{' | '}') {
            if *pending_space && !out.is_empty() {
                out.push(' ');
            }
            *pending_space = false;
            out.push(c);
        }
    };
    while i < chars.len() {
        match chars[i] {
            '\\' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_alphabetic() {
                    j += 1;
                }
                if j == i + 1 {
                    // single-character escape
                    if let Some(&c) = chars.get(j) {
                        push(&mut out, c, &mut pending_space);
                        j += 1;
                    }
                }
                i = j;
            }
            // `$` with or without a closing partner is simply skipped: the
            // inner text of a fence flows through the same rules
            c => {
                push(&mut out, c, &mut pending_space);
                i += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn whitespace_collapse() {
        assert_eq!(clean_text("A  \n test"), "A test");
        assert_eq!(clean_text("  lead and trail \t"), "lead and trail");
    }

    #[test]
    fn math_fence_inner_text() {
        assert_eq!(clean_text("entropy $H(x)$ bound"), "entropy H(x) bound");
        assert_eq!(clean_text("runs in $O(n \\log n)$ time"), "runs in O(n n) time");
    }

    #[test]
    fn commands_and_escapes() {
        assert_eq!(clean_text("as measured by \\emph{fidelity}."), "as measured by fidelity.");
        assert_eq!(clean_text("improves by 18\\% on R\\&D"), "improves by 18% on R&D");
        assert_eq!(clean_text("a \\{b\\} \\$ c \\\\ d"), "a b c d");
        assert_eq!(clean_text("trailing \\"), "trailing");
    }

    #[test]
    fn control_characters() {
        assert_eq!(clean_text("a\u{0}b\u{7}c\u{1b}d"), "abcd");
        assert_eq!(clean_text("x\u{85}y"), "x y");
    }

    proptest! {
        #[test]
        fn idempotent(s in "[ -~\\n\\t\u{0}-\u{1f}é漢]{0,80}") {
            let once = clean_text(&s);
            prop_assert_eq!(clean_text(&once), once.clone());
            let forbidden = once.chars().any(|c| c.is_control() || matches!(c, '$' | '\\' | '{' | '}'));
            prop_assert!(!forbidden);
            prop_assert!(!once.contains("  "));
            prop_assert_eq!(once.trim(), once.as_str());
        }
    }
}
