import { describe, expect, it } from "vitest";
import { INTERJECTIONS, stripEmojis, tokenize } from "../src/tokenize.js";

describe("stripEmojis", () => {
  it("removes pictographs and keeps words", () => {
    expect(stripEmojis("nice shot 📸🔥").trim()).toBe("nice shot");
  });

  it("handles ZWJ sequences and skin tone modifiers", () => {
    expect(stripEmojis("👩‍👩‍👧 family 👍🏽").replace(/\s+/g, " ").trim()).toBe("family");
  });

  it("leaves plain text untouched", () => {
    expect(stripEmojis("hello world")).toBe("hello world");
  });
});

describe("tokenize", () => {
  it("lowercases and splits on punctuation", () => {
    expect(tokenize("Sunset, at the BEACH!")).toEqual(["sunset", "at", "the", "beach"]);
  });

  it("drops interjections", () => {
    expect(tokenize("wow what a sunset lol")).toEqual(["what", "a", "sunset"]);
    for (const w of ["oh", "haha", "omg"]) {
      expect(INTERJECTIONS.has(w)).toBe(true);
      expect(tokenize(`${w} great`)).toEqual(["great"]);
    }
  });

  it("drops emojis before splitting", () => {
    expect(tokenize("cat🐱picture")).toEqual(["cat", "picture"]);
  });

  it("keeps hashtags, mentions and numbers", () => {
    expect(tokenize("#nofilter @alice took 2 shots")).toEqual([
      "#nofilter", "@alice", "took", "2", "shots",
    ]);
  });

  it("returns empty for emoji-only or blank input", () => {
    expect(tokenize("🔥🔥🔥")).toEqual([]);
    expect(tokenize("   ")).toEqual([]);
  });
});
