/**
 * Text cleanup and tokenization.
 *
 * Emojis and pictographs are stripped outright; interjections are removed
 * via a fixed stopword list shipped here (no external list dependency).
 */

// Common English interjections. Fixed list, lowercase, matched per token.
export const INTERJECTIONS = new Set([
  "ah", "aha", "alas", "aww", "bravo", "dang", "darn", "duh", "eh", "gee",
  "gosh", "ha", "haha", "hey", "hmm", "hooray", "huh", "hurrah", "lol",
  "meh", "oh", "oi", "omg", "oops", "ouch", "ow", "phew", "psst", "shh",
  "tsk", "ugh", "uh", "um", "whoa", "wow", "yay", "yikes", "yo", "woohoo",
]);

const EMOJI_RE = /[\p{Extended_Pictographic}\p{Emoji_Modifier}\p{Emoji_Modifier_Base}\u{FE0F}\u{200D}\u{20E3}]/gu;

export function stripEmojis(text: string): string {
  return text.replace(EMOJI_RE, " ");
}

/**
 * Lowercase, strip emojis and punctuation, split on whitespace, then drop
 * interjections. Returns the surviving word tokens in order.
 */
export function tokenize(text: string): string[] {
  const cleaned = stripEmojis(text.toLowerCase()).replace(/[^\p{L}\p{N}'#@]+/gu, " ");
  return cleaned
    .split(/\s+/)
    .filter((w) => w.length > 0)
    .filter((w) => !INTERJECTIONS.has(w.replace(/'/g, "")));
}
