import type { TableOp } from "./types.js";

/**
 * Client-side mirror of the server's per-dataset operation history.
 *
 * The server is the source of truth: after every mutation round trip the
 * mirror is checked against the history echoed in the response, and any
 * divergence (a lost request, an out-of-order apply) throws rather than
 * silently drifting.
 */
export class HistoryMirror {
    private ops: TableOp[] = [];

    get length(): number {
        return this.ops.length;
    }

    list(): TableOp[] {
        return this.ops.map((op) => ({ ...op }) as TableOp);
    }

    push(op: TableOp): void {
        this.ops.push(op);
    }

    pop(): TableOp | undefined {
        return this.ops.pop();
    }

    clear(): void {
        this.ops = [];
    }

    /** True when the mirror matches the server-reported history exactly. */
    matches(serverHistory: TableOp[]): boolean {
        return JSON.stringify(this.ops) === JSON.stringify(serverHistory);
    }

    /** Throw if the mirror has drifted from the server history. */
    assertMatches(serverHistory: TableOp[]): void {
        if (!this.matches(serverHistory)) {
            throw new Error(
                `history mirror out of sync: local ${JSON.stringify(this.ops)} ` +
                    `vs server ${JSON.stringify(serverHistory)}`,
            );
        }
    }
}
