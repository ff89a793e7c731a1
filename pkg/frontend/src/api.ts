import type {
    CohortSummary,
    DatasetSummary,
    ErrorBody,
    Question,
    Recommendation,
    TableOp,
} from "./types.js";

/** Server error surfaced to the UI; message is human-readable. */
export class ApiError extends Error {
    constructor(
        readonly status: number,
        readonly code: string,
        message: string,
        readonly detail?: Record<string, unknown>,
    ) {
        super(message);
        this.name = "ApiError";
    }
}

async function throwApiError(response: Response): Promise<never> {
    let body: ErrorBody | null = null;
    try {
        body = (await response.json()) as ErrorBody;
    } catch {
        // non-JSON error body; fall through
    }
    throw new ApiError(
        response.status,
        body?.code ?? `HTTP${response.status}`,
        body?.message ?? `request failed with status ${response.status}`,
        body?.detail,
    );
}

/** Typed client for the watson JSON/SVG API. */
export class ApiClient {
    constructor(
        readonly baseUrl: string,
        private readonly fetchImpl: typeof fetch = fetch,
    ) {}

    private async json<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await this.fetchImpl(this.baseUrl + path, init);
        if (!response.ok) await throwApiError(response);
        return (await response.json()) as T;
    }

    private post<T>(path: string, body: unknown): Promise<T> {
        return this.json<T>(path, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        });
    }

    uploadDataset(csv: string, codebook?: unknown): Promise<DatasetSummary> {
        const payload: Record<string, unknown> = { csv };
        if (codebook !== undefined) payload.codebook = codebook;
        return this.post("/datasets", payload);
    }

    schema(id: string): Promise<DatasetSummary> {
        return this.json(`/datasets/${id}/schema`);
    }

    applyOp(id: string, op: TableOp): Promise<DatasetSummary> {
        return this.post(`/datasets/${id}/ops`, op);
    }

    undo(id: string): Promise<DatasetSummary> {
        return this.post(`/datasets/${id}/ops/undo`, {});
    }

    async plot(
        id: string,
        vars: string[],
        opts: { bar?: string; panel?: string; scales?: boolean } = {},
    ): Promise<string> {
        const params = new URLSearchParams({ vars: vars.join(",") });
        if (opts.bar) params.set("bar", opts.bar);
        if (opts.panel) params.set("panel", opts.panel);
        if (opts.scales === false) params.set("scales", "0");
        const response = await this.fetchImpl(
            `${this.baseUrl}/datasets/${id}/plot?${params}`,
        );
        if (!response.ok) await throwApiError(response);
        return response.text();
    }

    async questions(
        id: string,
        vars: string[],
        bar?: string,
        max?: number,
    ): Promise<Question[]> {
        const params = new URLSearchParams({ vars: vars.join(",") });
        if (bar) params.set("bar", bar);
        if (max !== undefined) params.set("max", String(max));
        const body = await this.json<{ questions: Question[] }>(
            `/datasets/${id}/questions?${params}`,
        );
        return body.questions;
    }

    uploadCohort(csv: string, schema: unknown): Promise<CohortSummary> {
        return this.post("/cohorts", { csv, schema });
    }

    recommend(
        id: string,
        patient: { features: Record<string, unknown> },
        params: { k?: number; k_min?: number; direction?: string } = {},
    ): Promise<Recommendation> {
        return this.post(`/cohorts/${id}/recommend`, { patient, ...params });
    }
}
