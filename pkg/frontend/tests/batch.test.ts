import { describe, expect, it } from "vitest";

import {
  allLabeled,
  counterText,
  firstUnlabeledFrom,
  labelCurrent,
  labeledCount,
  moveCursor,
  newBatch,
  remainingHint,
  reopenItem,
} from "../src/batch.js";

const items = [
  { id: "a", text: "first" },
  { id: "b", text: "second" },
  { id: "c", text: "third" },
];

describe("batch state", () => {
  it("starts at the first item with an i-of-n counter", () => {
    const state = newBatch(0, items);
    expect(state.cursor).toBe(0);
    expect(counterText(state)).toBe("1 of 3");
    expect(labeledCount(state)).toBe(0);
    expect(allLabeled(state)).toBe(false);
  });

  it("labels the current item and advances to the next unlabeled one", () => {
    let state = newBatch(0, items);
    state = labelCurrent(state, "yes");
    expect(state.labels).toEqual({ a: "yes" });
    expect(state.cursor).toBe(1);
    state = labelCurrent(state, "no");
    state = labelCurrent(state, "yes");
    expect(allLabeled(state)).toBe(true);
    expect(remainingHint(state)).toBe("all labeled");
  });

  it("wraps the cursor past labeled items", () => {
    let state = newBatch(0, items);
    state = moveCursor(state, 2);
    state = labelCurrent(state, "yes"); // labels c, wraps to a
    expect(state.cursor).toBe(0);
  });

  it("restores draft labels and starts on the first unlabeled item", () => {
    const state = newBatch(1, items, { a: "yes", c: "no" });
    expect(labeledCount(state)).toBe(2);
    expect(state.cursor).toBe(1);
    expect(counterText(state)).toBe("2 of 3");
  });

  it("ignores drafts for unknown items", () => {
    const state = newBatch(1, items, { zz: "yes" });
    expect(labeledCount(state)).toBe(0);
  });

  it("reopens a rejected item, keeping the others", () => {
    let state = newBatch(0, items, { a: "yes", b: "no", c: "yes" });
    state = reopenItem(state, "b");
    expect(state.labels).toEqual({ a: "yes", c: "yes" });
    expect(state.cursor).toBe(1);
    expect(allLabeled(state)).toBe(false);
    expect(remainingHint(state)).toBe("1 item left");
  });

  it("clamps cursor moves to the batch bounds", () => {
    const state = newBatch(0, items);
    expect(moveCursor(state, -1).cursor).toBe(0);
    expect(moveCursor(state, 3).cursor).toBe(0);
    expect(moveCursor(state, 2).cursor).toBe(2);
  });

  it("firstUnlabeledFrom scans forward with wrap-around", () => {
    const state = newBatch(0, items, { b: "x" });
    expect(firstUnlabeledFrom(state, 1)).toBe(2);
    expect(firstUnlabeledFrom(state, 2)).toBe(2);
    const full = newBatch(0, items, { a: "x", b: "x", c: "x" });
    expect(firstUnlabeledFrom(full, 5)).toBe(2); // clamped
  });

  it("handles an empty batch without crashing", () => {
    const state = newBatch(0, []);
    expect(counterText(state)).toBe("0 of 0");
    expect(allLabeled(state)).toBe(true);
    expect(labelCurrent(state, "x")).toBe(state);
  });
});
