import { ApiClient } from "./api.js";
import { HistoryMirror } from "./history.js";
import type { DatasetSummary, Question, TableOp, VariableInfo } from "./types.js";

/**
 * The whole UI state for one dataset: selection, current SVG, questions,
 * and the operation history mirror.
 *
 * Every piece of displayed data comes from a server response; the session
 * does no statistical computation of its own. Any state is reconstructible
 * from (datasetId, history, selection): `restore` replays exactly that.
 */
export class Session {
    datasetId: string | null = null;
    variables: VariableInfo[] = [];
    total = 0;
    selection: string[] = [];
    barVar: string | undefined;
    panelVar: string | undefined;
    currentSvg = "";
    questions: Question[] = [];

    readonly history = new HistoryMirror();
    private mutationQueue: Promise<unknown> = Promise.resolve();

    constructor(private readonly api: ApiClient) {}

    /** Upload a CSV (plus optional codebook) and adopt the new dataset. */
    async upload(csv: string, codebook?: unknown): Promise<DatasetSummary> {
        const summary = await this.api.uploadDataset(csv, codebook);
        this.adopt(summary);
        this.selection = [];
        this.barVar = undefined;
        this.panelVar = undefined;
        this.currentSvg = "";
        this.questions = [];
        return summary;
    }

    /** Re-attach to an existing dataset and replay a selection. */
    async restore(datasetId: string, selection: string[], barVar?: string): Promise<void> {
        const summary = await this.api.schema(datasetId);
        this.datasetId = summary.id;
        this.applySummary(summary);
        this.history.clear();
        for (const op of summary.history) this.history.push(op);
        await this.selectVariables(selection, barVar);
    }

    /** Choose 1-3 variables (and optionally the bar variable); refreshes. */
    async selectVariables(vars: string[], barVar?: string, panelVar?: string): Promise<void> {
        if (vars.length > 3) {
            throw new Error("select at most 3 variables");
        }
        this.selection = [...vars];
        this.barVar = barVar;
        this.panelVar = panelVar;
        await this.refresh();
    }

    /**
     * Apply one table operation. Mutations are queued so at most one is in
     * flight per dataset, matching the server's per-dataset serialization.
     */
    applyOp(op: TableOp): Promise<void> {
        return this.enqueue(async () => {
            const id = this.requireDataset();
            const summary = await this.api.applyOp(id, op);
            this.history.push(op);
            this.history.assertMatches(summary.history);
            this.applySummary(summary);
            this.pruneSelection();
            await this.refresh();
        });
    }

    /** Undo the most recent operation (history truncation + replay). */
    undo(): Promise<void> {
        return this.enqueue(async () => {
            const id = this.requireDataset();
            const summary = await this.api.undo(id);
            this.history.pop();
            this.history.assertMatches(summary.history);
            this.applySummary(summary);
            this.pruneSelection();
            await this.refresh();
        });
    }

    /** Refetch the plot and (for pairs) the question list. */
    async refresh(): Promise<void> {
        const id = this.requireDataset();
        if (this.selection.length === 0) {
            this.currentSvg = "";
            this.questions = [];
            return;
        }
        this.currentSvg = await this.api.plot(id, this.selection, {
            bar: this.barVar,
            panel: this.panelVar,
        });
        this.questions =
            this.selection.length === 2
                ? await this.api.questions(id, this.selection, this.barVar)
                : [];
    }

    /** Verify the mirror against a fresh server fetch (test hook). */
    async verifyHistorySync(): Promise<boolean> {
        const id = this.requireDataset();
        const summary = await this.api.schema(id);
        return this.history.matches(summary.history);
    }

    variableNames(): string[] {
        return this.variables.map((v) => v.name);
    }

    categoriesOf(name: string): string[] {
        const found = this.variables.find((v) => v.name === name);
        return found ? [...found.categories] : [];
    }

    private adopt(summary: DatasetSummary): void {
        this.datasetId = summary.id;
        this.history.clear();
        this.applySummary(summary);
    }

    private applySummary(summary: DatasetSummary): void {
        this.variables = summary.variables;
        this.total = summary.total;
    }

    /** Drop selected variables that an op removed (e.g. marginalize). */
    private pruneSelection(): void {
        const names = new Set(this.variableNames());
        this.selection = this.selection.filter((v) => names.has(v));
        if (this.barVar && !names.has(this.barVar)) this.barVar = undefined;
        if (this.panelVar && !names.has(this.panelVar)) this.panelVar = undefined;
    }

    private requireDataset(): string {
        if (!this.datasetId) throw new Error("no dataset uploaded yet");
        return this.datasetId;
    }

    private enqueue<T>(task: () => Promise<T>): Promise<T> {
        const next = this.mutationQueue.then(task, task);
        this.mutationQueue = next.catch(() => undefined);
        return next;
    }
}
