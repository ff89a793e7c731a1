import { ApiClient, ApiError } from "./api.js";
import { highlightEvidence, clearHighlights } from "./highlight.js";
import { Session } from "./session.js";
import type { TableOp } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
}

/** Wire the static page to a Session; returns the session for debugging. */
export function mountApp(baseUrl: string = ""): Session {
    const api = new ApiClient(baseUrl);
    const session = new Session(api);

    const banner = el<HTMLDivElement>("banner");
    const fileInput = el<HTMLInputElement>("csv-file");
    const codebookInput = el<HTMLInputElement>("codebook-file");
    const uploadBtn = el<HTMLButtonElement>("upload-btn");
    const datasetInfo = el<HTMLDivElement>("dataset-info");
    const varList = el<HTMLDivElement>("variable-list");
    const barSelect = el<HTMLSelectElement>("bar-select");
    const plotBox = el<HTMLDivElement>("plot");
    const questionList = el<HTMLUListElement>("question-list");
    const opVar = el<HTMLSelectElement>("op-variable");
    const catList = el<HTMLDivElement>("category-list");
    const mergeBtn = el<HTMLButtonElement>("merge-btn");
    const removeBtn = el<HTMLButtonElement>("remove-btn");
    const addBtn = el<HTMLButtonElement>("add-btn");
    const undoBtn = el<HTMLButtonElement>("undo-btn");
    const historyBox = el<HTMLOListElement>("history");

    function showError(err: unknown): void {
        const text =
            err instanceof ApiError
                ? `${err.code}: ${err.message}`
                : err instanceof Error
                  ? err.message
                  : String(err);
        banner.textContent = text;
        banner.hidden = false;
    }

    function clearError(): void {
        banner.hidden = true;
        banner.textContent = "";
    }

    async function guarded(action: () => Promise<void>): Promise<void> {
        clearError();
        try {
            await action();
        } catch (err) {
            showError(err);
        }
        render();
    }

    function selectedVariables(): string[] {
        return Array.from(
            varList.querySelectorAll<HTMLInputElement>("input:checked"),
        ).map((input) => input.value);
    }

    function selectedCategories(): string[] {
        return Array.from(
            catList.querySelectorAll<HTMLInputElement>("input:checked"),
        ).map((input) => input.value);
    }

    function render(): void {
        datasetInfo.textContent = session.datasetId
            ? `dataset ${session.datasetId}: ${session.total} records, ` +
              `${session.variables.length} variables`
            : "no dataset";

        // variable picker (checkboxes), preserving checked state
        const checked = new Set(session.selection);
        varList.innerHTML = "";
        for (const v of session.variables) {
            const label = document.createElement("label");
            const box = document.createElement("input");
            box.type = "checkbox";
            box.value = v.name;
            box.checked = checked.has(v.name);
            box.addEventListener("change", () => {
                void guarded(async () => {
                    const vars = selectedVariables().slice(0, 3);
                    const bar = barSelect.value || undefined;
                    await session.selectVariables(
                        vars,
                        vars.includes(bar ?? "") ? bar : undefined,
                    );
                });
            });
            label.append(box, ` ${v.name} (${v.categories.length})`);
            varList.append(label);
        }

        // bar-variable dropdown tracks the selection
        const previousBar = session.barVar ?? "";
        barSelect.innerHTML = "";
        barSelect.append(new Option("server default", ""));
        for (const name of session.selection) {
            barSelect.append(new Option(name, name, false, name === previousBar));
        }

        // current plot, injected verbatim from the server
        plotBox.innerHTML = session.currentSvg;

        // questions: click to highlight the referenced marks
        questionList.innerHTML = "";
        for (const q of session.questions) {
            const item = document.createElement("li");
            item.textContent = q.text;
            item.title = q.kind;
            item.addEventListener("click", () => {
                const matched = highlightEvidence(plotBox, q);
                if (!matched) clearHighlights(plotBox);
            });
            questionList.append(item);
        }

        // category op panel for the chosen variable
        const opVariable = opVar.value;
        opVar.innerHTML = "";
        for (const v of session.variables) {
            opVar.append(
                new Option(v.name, v.name, false, v.name === opVariable),
            );
        }
        catList.innerHTML = "";
        const current = session.variables.find((v) => v.name === opVar.value);
        for (const cat of current?.categories ?? []) {
            const label = document.createElement("label");
            const box = document.createElement("input");
            box.type = "checkbox";
            box.value = cat;
            label.append(box, ` ${cat}`);
            catList.append(label);
        }

        undoBtn.disabled = session.history.length === 0;
        historyBox.innerHTML = "";
        for (const op of session.history.list()) {
            const item = document.createElement("li");
            item.textContent = describeOp(op);
            historyBox.append(item);
        }
    }

    uploadBtn.addEventListener("click", () => {
        void guarded(async () => {
            const file = fileInput.files?.[0];
            if (!file) throw new Error("choose a CSV file first");
            const csv = await file.text();
            let codebook: unknown;
            const cb = codebookInput.files?.[0];
            if (cb) codebook = JSON.parse(await cb.text());
            await session.upload(csv, codebook);
        });
    });

    opVar.addEventListener("change", render);

    mergeBtn.addEventListener("click", () => {
        void guarded(async () => {
            const cats = selectedCategories();
            if (cats.length < 2) throw new Error("pick at least two categories to merge");
            const label = window.prompt("label for the merged category", cats.join("+"));
            if (!label) return;
            await session.applyOp({
                kind: "merge", var: opVar.value, cats, new_label: label,
            });
        });
    });

    removeBtn.addEventListener("click", () => {
        void guarded(async () => {
            const cats = selectedCategories();
            if (cats.length !== 1) throw new Error("pick exactly one category to remove");
            await session.applyOp({ kind: "remove", var: opVar.value, cat: cats[0]! });
        });
    });

    addBtn.addEventListener("click", () => {
        void guarded(async () => {
            const label = window.prompt("label for the new (empty) category");
            if (!label) return;
            await session.applyOp({ kind: "add", var: opVar.value, label });
        });
    });

    undoBtn.addEventListener("click", () => {
        void guarded(() => session.undo());
    });

    render();
    return session;
}

function describeOp(op: TableOp): string {
    switch (op.kind) {
        case "merge":
            return `merge ${op.cats.join(", ")} -> ${op.new_label} (${op.var})`;
        case "remove":
            return `remove ${op.cat} (${op.var})`;
        case "add":
            return `add ${op.label} (${op.var})`;
        case "marginalize":
            return `keep ${op.keep.join(", ")}`;
        case "permute":
            return `reorder ${op.order.join(", ")}`;
    }
}

declare global {
    interface Window {
        watsonSession?: Session;
    }
}

if (typeof document !== "undefined" && document.getElementById("upload-btn")) {
    window.watsonSession = mountApp("");
}
