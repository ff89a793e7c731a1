// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { clearHighlights, evidenceTargets, highlightEvidence } from "../src/highlight.js";
import type { Question } from "../src/types.js";

const SVG = `
<svg xmlns="http://www.w3.org/2000/svg">
  <rect class="seg" data-bar="Lagos" data-color="first"/>
  <rect class="seg" data-bar="Lagos" data-color="second"/>
  <rect class="seg" data-bar="Kano" data-color="first"/>
  <rect class="bar" data-bar="Lagos" data-total="10"/>
  <rect class="bar" data-bar="Kano" data-total="5"/>
  <rect class="cell" data-bar="Lagos" data-color="first"/>
  <rect class="cell" data-bar="Kano" data-color="second"/>
</svg>`;

function q(kind: Question["kind"], evidence: Question["evidence"]): Question {
    return { text: "?", kind, evidence };
}

describe("evidence highlighting", () => {
    beforeEach(() => {
        document.body.innerHTML = SVG;
    });

    it("targets a single cell for bar+color evidence", () => {
        const targets = evidenceTargets(
            document.body, q("largest_deviation", { bar: "Lagos", color: "first" }),
        );
        expect(targets).toHaveLength(2); // the seg and the residual cell
        for (const el of targets) {
            expect(el.getAttribute("data-bar")).toBe("Lagos");
            expect(el.getAttribute("data-color")).toBe("first");
        }
    });

    it("targets the whole bar for bar-only evidence", () => {
        const targets = evidenceTargets(
            document.body, q("dominant_category", { bar: "Kano" }),
        );
        expect(targets.length).toBe(3); // seg + outline + residual cell
    });

    it("targets both bars for compare_bars evidence", () => {
        const targets = evidenceTargets(
            document.body, q("compare_bars", { bars: ["Lagos", "Kano"] }),
        );
        expect(targets.length).toBeGreaterThanOrEqual(4);
    });

    it("targets each listed cell for small_cell evidence", () => {
        const targets = evidenceTargets(
            document.body,
            q("small_cell", { cells: [["Lagos", "first"], ["Kano", "second"]] }),
        );
        expect(targets).toHaveLength(3);
    });

    it("falls back to color evidence for trends", () => {
        const targets = evidenceTargets(
            document.body, q("order_trend", { color: "first" }),
        );
        expect(targets).toHaveLength(3);
    });

    it("highlight marks and clear removes", () => {
        const matched = highlightEvidence(
            document.body, q("dominant_category", { bar: "Lagos" }),
        );
        expect(matched).toBe(4); // 2 segs + outline + residual cell
        expect(document.querySelectorAll(".evidence-highlight")).toHaveLength(4);
        clearHighlights(document.body);
        expect(document.querySelectorAll(".evidence-highlight")).toHaveLength(0);
    });

    it("handles labels containing quotes", () => {
        document.body.innerHTML = `<svg><rect class="bar" data-bar="O&quot;Brien" data-total="1"/></svg>`;
        const targets = evidenceTargets(
            document.body, q("dominant_category", { bar: 'O"Brien' }),
        );
        expect(targets).toHaveLength(1);
    });
});
