/// Characters that end a clause.
pub const CLAUSE_SEPARATORS: &[char] = &['，', '。', '；', '！', '？', '、', ',', ';', '.'];

/// Byte spans of the clauses in `step`, trimmed, in order.
///
/// Everything outside the spans is separator punctuation or whitespace.
pub fn clause_spans(step: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut push = |from: usize, to: usize| {
        let piece = &step[from..to];
        let trimmed = piece.trim();
        if !trimmed.is_empty() {
            let lead = piece.len() - piece.trim_start().len();
            spans.push((from + lead, from + lead + trimmed.len()));
        }
    };
    for (i, c) in step.char_indices() {
        if CLAUSE_SEPARATORS.contains(&c) {
            push(start, i);
            start = i + c.len_utf8();
        }
    }
    push(start, step.len());
    spans
}

/// Splits a step into clauses on Chinese and ASCII clause punctuation.
///
/// ```
/// use proctext_core::parser::segment_clauses;
/// assert_eq!(segment_clauses("洗净鱿鱼，切成块。"), vec!["洗净鱿鱼", "切成块"]);
/// ```
pub fn segment_clauses(step: &str) -> Vec<String> {
    clause_spans(step)
        .into_iter()
        .map(|(a, b)| step[a..b].to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(segment_clauses("洗净鱿鱼，切成块。"), ["洗净鱿鱼", "切成块"]);
        assert!(segment_clauses("").is_empty());
        assert_eq!(segment_clauses("abc"), ["abc"]);
        assert_eq!(
            segment_clauses("cut off the head, wash; drain."),
            ["cut off the head", "wash", "drain"]
        );
        assert_eq!(segment_clauses("葱、姜、蒜"), ["葱", "姜", "蒜"]);
        assert!(segment_clauses("。，, ;").is_empty());
    }

    proptest! {
        #[test]
        fn gaps_hold_only_separators_and_whitespace(s in "[a-c 鱼肉，。；、,;.]{0,24}") {
            let spans = clause_spans(&s);
            let mut cursor = 0;
            let mut rebuilt = String::new();
            for &(a, b) in &spans {
                prop_assert!(a >= cursor && b > a);
                let gap = &s[cursor..a];
                prop_assert!(gap.chars().all(|c| c.is_whitespace() || CLAUSE_SEPARATORS.contains(&c)));
                rebuilt.push_str(gap);
                rebuilt.push_str(&s[a..b]);
                cursor = b;
            }
            let tail = &s[cursor..];
            prop_assert!(tail.chars().all(|c| c.is_whitespace() || CLAUSE_SEPARATORS.contains(&c)));
            rebuilt.push_str(tail);
            prop_assert_eq!(rebuilt, s.clone());
            for &(a, b) in &spans {
                prop_assert!(!s[a..b].chars().any(|c| CLAUSE_SEPARATORS.contains(&c)));
            }
        }
    }
}
