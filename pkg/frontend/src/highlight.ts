import type { Question } from "./types.js";

const HIGHLIGHT_CLASS = "evidence-highlight";

function escapeAttr(value: string): string {
    return value.replace(/\\/g, "\\\\").replace(/"/g, '\\"');
}

function barSelector(bar: string): string {
    return `[data-bar="${escapeAttr(bar)}"]`;
}

function cellSelector(bar: string, color: string): string {
    return `[data-bar="${escapeAttr(bar)}"][data-color="${escapeAttr(color)}"]`;
}

/** Collect the plot elements a question's evidence points at. */
export function evidenceTargets(root: ParentNode, question: Question): Element[] {
    const ev = question.evidence;
    const selectors: string[] = [];
    if (ev.bar && ev.color) {
        selectors.push(cellSelector(ev.bar, ev.color));
    } else if (ev.bar) {
        selectors.push(barSelector(ev.bar));
    }
    if (ev.bars) {
        for (const bar of ev.bars) selectors.push(barSelector(bar));
    }
    if (ev.cells) {
        for (const [bar, color] of ev.cells) selectors.push(cellSelector(bar, color));
    }
    if (!selectors.length && ev.color) {
        selectors.push(`[data-color="${escapeAttr(ev.color)}"]`);
    }
    const out: Element[] = [];
    for (const selector of selectors) {
        root.querySelectorAll(selector).forEach((el) => out.push(el));
    }
    return out;
}

/** Remove any existing highlight marks under the plot root. */
export function clearHighlights(root: ParentNode): void {
    root.querySelectorAll(`.${HIGHLIGHT_CLASS}`).forEach((el) => {
        el.classList.remove(HIGHLIGHT_CLASS);
        (el as SVGElement).style?.removeProperty("stroke");
        (el as SVGElement).style?.removeProperty("stroke-width");
    });
}

/** Highlight the elements referenced by a question; returns how many matched. */
export function highlightEvidence(root: ParentNode, question: Question): number {
    clearHighlights(root);
    const targets = evidenceTargets(root, question);
    for (const el of targets) {
        el.classList.add(HIGHLIGHT_CLASS);
        const style = (el as SVGElement).style;
        if (style) {
            style.setProperty("stroke", "#ff8800");
            style.setProperty("stroke-width", "2.5");
        }
    }
    return targets.length;
}
