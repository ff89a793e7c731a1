// Payload shapes of the watson server API. The UI never computes statistics:
// every number shown on screen arrives in one of these responses.

export interface VariableInfo {
    name: string;
    categories: string[];
    scores?: number[];
}

export interface DatasetSummary {
    id: string;
    variables: VariableInfo[];
    total: number;
    history: TableOp[];
}

export type TableOp =
    | { kind: "merge"; var: string; cats: string[]; new_label: string }
    | { kind: "remove"; var: string; cat: string }
    | { kind: "add"; var: string; label: string }
    | { kind: "marginalize"; keep: string[] }
    | { kind: "permute"; order: string[] };

export type QuestionKind =
    | "largest_deviation"
    | "dominant_category"
    | "order_trend"
    | "small_cell"
    | "compare_bars";

export interface Question {
    text: string;
    kind: QuestionKind;
    evidence: {
        bar?: string;
        color?: string;
        bars?: string[];
        cells?: [string, string][];
        order?: string[];
        [key: string]: unknown;
    };
}

export interface ErrorBody {
    code: string;
    message: string;
    detail?: Record<string, unknown>;
}

export interface CohortSummary {
    id: string;
    therapies: string[];
    n_patients: number;
    direction: "lower" | "higher";
}

export interface TherapyPrediction {
    predicted_outcome: number;
    support: number;
    used_k: number;
}

export interface Recommendation {
    per_therapy: Record<string, TherapyPrediction>;
    best: string;
    direction: "lower" | "higher";
}
