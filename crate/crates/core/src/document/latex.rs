//! Escaping, LLM-output sanitizing and structural validation of LaTeX.

use std::collections::BTreeSet;

use super::DocumentError;

const TEXT_MACROS: [&str; 3] = ["\\textbackslash{}", "\\textasciitilde{}", "\\textasciicircum{}"];

/// Escapes `& % $ # _ { } ~ ^ \` and drops control characters.
pub fn escape_latex(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 8);
    for c in text.chars() {
        match c {
            '&' | '%' | '$' | '#' | '_' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '~' => out.push_str(TEXT_MACROS[1]),
            '^' => out.push_str(TEXT_MACROS[2]),
            '\\' => out.push_str(TEXT_MACROS[0]),
            c if c.is_control() && c != '\n' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

/// Length of a `\citep{...}` marker at the start of `s`, if it is one with
/// a well-formed key list.
fn citation_len(s: &str) -> Option<usize> {
    let rest = s.strip_prefix("\\citep{")?;
    let end = rest.find('}')?;
    let keys = &rest[..end];
    let ok = !keys.trim().is_empty()
        && keys.split(',').all(|k| !k.trim().is_empty() && k.trim().chars().all(|c| c.is_ascii_alphanumeric()));
    ok.then_some("\\citep{".len() + end + 1)
}

/// Keys of every `\citep{...}` in order of appearance, comma lists expanded.
pub fn extract_citations(text: &str) -> Vec<String> {
    let mut keys = Vec::new();
    let mut rest = text;
    while let Some(i) = rest.find("\\citep{") {
        let tail = &rest[i + "\\citep{".len()..];
        match tail.find('}') {
            Some(end) => {
                keys.extend(tail[..end].split(',').map(|k| k.trim().to_string()).filter(|k| !k.is_empty()));
                rest = &tail[end + 1..];
            }
            None => break,
        }
    }
    keys
}

/// Makes model output safe to drop into a LaTeX body: code fences are
/// removed, `\citep{...}` markers and existing escapes are kept, and every
/// other special character is escaped. Idempotent on [`escape_latex`] output.
pub fn sanitize_llm_text(text: &str) -> String {
    let body: Vec<&str> = text.lines().filter(|l| !l.trim_start().starts_with("```")).collect();
    let body = body.join("\n");
    let mut out = String::with_capacity(body.len());
    let mut i = 0;
    while i < body.len() {
        let rest = &body[i..];
        if let Some(n) = citation_len(rest) {
            out.push_str(&rest[..n]);
            i += n;
            continue;
        }
        if let Some(m) = TEXT_MACROS.iter().find(|m| rest.starts_with(**m)) {
            out.push_str(m);
            i += m.len();
            continue;
        }
        let mut chars = rest.chars();
        let c = chars.next().expect("non-empty");
        if c == '\\' {
            if let Some(next @ ('&' | '%' | '$' | '#' | '_' | '{' | '}')) = chars.next() {
                out.push('\\');
                out.push(next);
                i += 2;
                continue;
            }
        }
        out.push_str(&escape_latex(&c.to_string()));
        i += c.len_utf8();
    }
    out.trim().to_string()
}

/// Readable text from a LaTeX body: citation markers removed, escapes and
/// text macros turned back into characters, whitespace collapsed.
pub fn latex_to_plain(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        if let Some(n) = citation_len(rest) {
            i += n;
            continue;
        }
        if let Some((m, c)) = TEXT_MACROS.iter().zip(['\\', '~', '^']).find(|(m, _)| rest.starts_with(**m)) {
            out.push(c);
            i += m.len();
            continue;
        }
        let mut chars = rest.chars();
        let c = chars.next().expect("non-empty");
        if c == '\\' {
            if let Some(next @ ('&' | '%' | '$' | '#' | '_' | '{' | '}')) = chars.next() {
                out.push(next);
                i += 2;
                continue;
            }
        }
        out.push(c);
        i += c.len_utf8();
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Checks brace balance, `\begin`/`\end` nesting and that every cited key is
/// in `defined`.
pub fn validate_latex(tex: &str, defined: &BTreeSet<String>) -> Result<(), DocumentError> {
    let bytes = tex.as_bytes();
    let mut depth: i64 = 0;
    let mut line = 1;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => {
                // an escaped character, including \{ and \}, is not structure
                i += 2;
                continue;
            }
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'\n' => line += 1,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth < 0 {
                    return Err(DocumentError::UnbalancedEnvironment(format!("unmatched '}}' on line {line}")));
                }
            }
            _ => {}
        }
        i += 1;
    }
    if depth != 0 {
        return Err(DocumentError::UnbalancedEnvironment(format!("{depth} unclosed '{{'")));
    }
    let mut stack: Vec<&str> = Vec::new();
    let mut rest = tex;
    loop {
        let b = rest.find("\\begin{");
        let e = rest.find("\\end{");
        let (pos, is_begin) = match (b, e) {
            (None, None) => break,
            (Some(b), Some(e)) => (b.min(e), b < e),
            (Some(b), None) => (b, true),
            (None, Some(e)) => (e, false),
        };
        let after = &rest[pos + if is_begin { 7 } else { 5 }..];
        let close = after
            .find('}')
            .ok_or_else(|| DocumentError::UnbalancedEnvironment("unterminated environment name".into()))?;
        let name = &after[..close];
        if is_begin {
            stack.push(name);
        } else {
            match stack.pop() {
                Some(open) if open == name => {}
                Some(open) => {
                    return Err(DocumentError::UnbalancedEnvironment(format!("\\begin{{{open}}} closed by \\end{{{name}}}")))
                }
                None => return Err(DocumentError::UnbalancedEnvironment(format!("\\end{{{name}}} without \\begin"))),
            }
        }
        rest = &after[close + 1..];
    }
    if let Some(open) = stack.pop() {
        return Err(DocumentError::UnbalancedEnvironment(format!("\\begin{{{open}}} never closed")));
    }
    if let Some(k) = extract_citations(tex).into_iter().find(|k| !defined.contains(k)) {
        return Err(DocumentError::UndefinedCitation(k));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Byte offsets of special characters that are not part of an escape, a
    /// text macro or a citation marker.
    pub(crate) fn bare_specials(s: &str) -> Vec<usize> {
        let mut bad = Vec::new();
        let mut i = 0;
        while i < s.len() {
            let rest = &s[i..];
            if let Some(n) = citation_len(rest) {
                i += n;
                continue;
            }
            if let Some(m) = TEXT_MACROS.iter().find(|m| rest.starts_with(**m)) {
                i += m.len();
                continue;
            }
            let c = rest.chars().next().unwrap();
            if c == '\\' {
                match rest[1..].chars().next() {
                    Some('&' | '%' | '$' | '#' | '_' | '{' | '}') => {
                        i += 2;
                        continue;
                    }
                    _ => bad.push(i),
                }
            } else if "&%$#_{}~^".contains(c) {
                bad.push(i);
            }
            i += c.len_utf8();
        }
        bad
    }

    #[test]
    fn escapes() {
        assert_eq!(escape_latex("A & B"), "A \\& B");
        assert_eq!(escape_latex("50% of $x_1$ #1 {y} ~ ^ \\"), "50\\% of \\$x\\_1\\$ \\#1 \\{y\\} \\textasciitilde{} \\textasciicircum{} \\textbackslash{}");
    }

    #[test]
    fn citations() {
        assert_eq!(extract_citations("a \\citep{x1} b \\citep{y2, z3}"), ["x1", "y2", "z3"]);
        assert!(extract_citations("\\citep{unterminated").is_empty());
    }

    #[test]
    fn sanitize_cases() {
        assert_eq!(sanitize_llm_text("```latex\nA & B \\citep{k1}\n```"), "A \\& B \\citep{k1}");
        assert_eq!(sanitize_llm_text("\\textbf{x}"), "\\textbackslash{}textbf\\{x\\}");
        assert_eq!(sanitize_llm_text("\\citep{bad key}"), "\\textbackslash{}citep\\{bad key\\}");
    }

    #[test]
    fn validator() {
        let keys: BTreeSet<String> = ["k1".to_string()].into();
        assert!(validate_latex("\\begin{a}\\begin{b}x\\end{b}\\end{a} \\citep{k1}", &keys).is_ok());
        assert!(matches!(validate_latex("text }", &keys), Err(DocumentError::UnbalancedEnvironment(_))));
        assert!(matches!(validate_latex("{", &keys), Err(DocumentError::UnbalancedEnvironment(_))));
        assert!(matches!(validate_latex("\\begin{a}\\end{b}", &keys), Err(DocumentError::UnbalancedEnvironment(_))));
        assert!(matches!(validate_latex("\\begin{a}", &keys), Err(DocumentError::UnbalancedEnvironment(_))));
        assert!(validate_latex("\\{ escaped \\} % comment }", &keys).is_ok());
        match validate_latex("\\citep{k2}", &keys) {
            Err(DocumentError::UndefinedCitation(k)) => assert_eq!(k, "k2"),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn escaped_text_has_no_bare_specials(s in "[a-z &%$#_{}~^\\\\]{0,60}") {
            let e = escape_latex(&s);
            prop_assert!(bare_specials(&e).is_empty(), "{:?}", e);
            prop_assert!(validate_latex(&e, &BTreeSet::new()).is_ok());
        }

        #[test]
        fn plain_inverts_escape(s in "[a-z &%$#_{}~^\\\\]{0,60}") {
            let want = s.split_whitespace().collect::<Vec<_>>().join(" ");
            prop_assert_eq!(latex_to_plain(&escape_latex(&s)), want.clone());
            prop_assert_eq!(latex_to_plain(&format!("{} \\citep{{k1,k2}}", escape_latex(&s))), want);
        }

        #[test]
        fn sanitize_is_safe_and_idempotent(s in "[a-z0-9 &%$#_{}~^\\\\]{0,60}|[a-z ]{0,10}\\\\citep\\{[a-z0-9]{1,6}\\}[a-z ]{0,10}") {
            let once = sanitize_llm_text(&s);
            prop_assert!(bare_specials(&once).is_empty(), "{:?}", once);
            prop_assert_eq!(sanitize_llm_text(&once), once.clone());
            let e = escape_latex(&s).trim().to_string();
            prop_assert_eq!(sanitize_llm_text(&e), e);
        }
    }
}
