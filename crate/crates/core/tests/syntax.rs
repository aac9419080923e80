mod common;

use cogniview::syntax::{parse_source, print_ast, tokenize, SourceUnit, SyntaxError, TokenKind};
use proptest::prelude::*;

fn reparse(m: &cogniview::syntax::ModuleAst) -> cogniview::syntax::ModuleAst {
    parse_source(&SourceUnit::new("p.mpy", print_ast(m))).expect("printed module parses")
}

#[test]
fn corpus_round_trips() {
    let corpus = common::corpus();
    assert!(corpus.len() >= 30);
    for unit in corpus {
        let m = parse_source(&unit).unwrap_or_else(|e| panic!("{}: {e}", unit.path));
        assert!(reparse(&m).structurally_eq(&m), "{}", unit.path);
    }
}

#[test]
fn printing_is_idempotent_on_corpus() {
    for unit in common::corpus() {
        let once = print_ast(&parse_source(&unit).unwrap());
        let twice = print_ast(&reparse(&parse_source(&unit).unwrap()));
        assert_eq!(once, twice, "{}", unit.path);
    }
}

#[test]
fn canonical_style_examples() {
    assert_eq!(print_ast(&common::parse("x=1\n")), "x = 1\n");
    let text = print_ast(&common::parse("def f():\n    return 1\ndef g():\n    return 2\n"));
    assert_eq!(text, "def f():\n    return 1\n\ndef g():\n    return 2\n");
}

/// Every lexeme sits at its span, and the text between tokens on a line
/// is whitespace, with at most a comment after the last token.
#[test]
fn token_spans_reconstruct_lines() {
    for unit in common::corpus() {
        let lexed = tokenize(&unit).unwrap();
        let lines = unit.lines();
        let mut cursor: Option<(u32, usize)> = None;
        for tok in lexed.tokens.iter().filter(|t| !t.lexeme.is_empty()) {
            let line: Vec<char> = lines[tok.span.line as usize - 1].chars().collect();
            let (start, end) = (tok.span.col as usize - 1, tok.span.end_col as usize - 1);
            let text: String = line[start..end].iter().collect();
            assert_eq!(text, tok.lexeme, "{} line {}", unit.path, tok.span.line);
            let from = match cursor {
                Some((l, c)) if l == tok.span.line => c,
                _ => 0,
            };
            assert!(line[from..start].iter().all(|c| *c == ' '), "{} line {}", unit.path, tok.span.line);
            cursor = Some((tok.span.line, end));
        }
    }
}

#[test]
fn indent_dedent_balance() {
    for unit in common::corpus() {
        let mut depth: i64 = 0;
        for tok in tokenize(&unit).unwrap().tokens {
            match tok.kind {
                TokenKind::Indent => depth += 1,
                TokenKind::Dedent => depth -= 1,
                _ => {}
            }
            assert!(depth >= 0, "{}", unit.path);
        }
        assert_eq!(depth, 0, "{}", unit.path);
    }
}

#[test]
fn comparisons_do_not_chain() {
    let err = parse_source(&SourceUnit::new("t.mpy", "x = 1 < 2 < 3\n")).unwrap_err();
    assert!(matches!(err, SyntaxError::ChainedComparison(_)));
}

#[test]
fn tabs_are_rejected() {
    let err = parse_source(&SourceUnit::new("t.mpy", "if True:\n\tpass\n")).unwrap_err();
    assert!(matches!(err, SyntaxError::TabCharacter(_)));
}

proptest! {
    #[test]
    fn generated_modules_round_trip(m in common::gen::arb_module()) {
        let printed = print_ast(&m);
        let back = parse_source(&SourceUnit::new("g.mpy", printed.clone()));
        prop_assert!(back.is_ok(), "{printed}");
        prop_assert!(back.unwrap().structurally_eq(&m), "{printed}");
    }

    #[test]
    fn bytes_never_crash(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        if let Ok(unit) = SourceUnit::from_bytes("f.mpy", &bytes) {
            let _ = tokenize(&unit);
            let _ = parse_source(&unit);
        }
    }

    #[test]
    fn token_soup_never_crashes(
        words in prop::collection::vec(
            prop::sample::select(vec![
                "def", "f", "(", ")", ":", "\n", "    ", "if", "x", "=", "1", "+", "[", "]",
                "return", "while", "for", "in", "range", "\"s", "'", "#c", ",", "<", "not", "else",
            ]),
            0..40,
        )
    ) {
        let unit = SourceUnit::new("s.mpy", words.concat());
        let _ = parse_source(&unit);
    }
}
