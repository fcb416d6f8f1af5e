// Label-cluster validation: approve / reject / merge, server-confirmed only.

import { ApiClient } from "./api.js";
import { applyServerCluster, clearPending, stagePending, ViewState } from "./state.js";
import { ApiError, Cluster } from "./types.js";

export class ClustersView {
    private clusters: Cluster[] = [];
    private root!: HTMLElement;

    constructor(
        private api: ApiClient,
        private state: { get(): ViewState; set(next: ViewState): void },
        private showError: (message: string) => void,
        private showInfo: (message: string) => void,
    ) {}

    mount(root: HTMLElement): void {
        this.root = root;
    }

    async refresh(): Promise<void> {
        try {
            this.clusters = await this.api.clusters();
        } catch (err) {
            this.showError(`clusters unavailable: ${String(err)}`);
            return;
        }
        this.render();
    }

    private render(): void {
        const proposed = this.clusters.filter((c) => c.status === "proposed");
        const decided = this.clusters.filter((c) => c.status !== "proposed");
        this.root.innerHTML = `
          <h2>Proposed label clusters</h2>
          <div class="cluster-list proposed"></div>
          <h2>Decided</h2>
          <div class="cluster-list decided"></div>`;
        const proposedEl = this.root.querySelector(".proposed") as HTMLElement;
        const decidedEl = this.root.querySelector(".decided") as HTMLElement;
        if (!proposed.length) proposedEl.innerHTML = "<p>Nothing awaiting review.</p>";
        for (const cluster of proposed) proposedEl.appendChild(this.card(cluster));
        if (!decided.length) decidedEl.innerHTML = "<p>No decisions yet.</p>";
        for (const cluster of decided) decidedEl.appendChild(this.badgeCard(cluster));
    }

    private card(cluster: Cluster): HTMLElement {
        const el = document.createElement("div");
        el.className = "cluster-card";
        const targets = this.clusters
            .filter((c) => c.cluster_id !== cluster.cluster_id)
            .map((c) => `<option value="${c.cluster_id}">${c.cluster_id}</option>`)
            .join("");
        el.innerHTML = `
          <header><strong>${cluster.cluster_id}</strong> <span class="badge proposed">proposed</span></header>
          <p class="members">${cluster.members.join(", ")}</p>
          <div class="actions">
            <button type="button" data-act="approved">approve</button>
            <button type="button" data-act="rejected">reject</button>
            <label>merge into
              <select aria-label="merge target"><option value="">choose…</option>${targets}</select>
            </label>
            <button type="button" data-act="merged" disabled>merge</button>
          </div>`;
        const select = el.querySelector("select") as HTMLSelectElement;
        const mergeBtn = el.querySelector("button[data-act=merged]") as HTMLButtonElement;
        select.addEventListener("change", () => {
            // client mirrors the server's 400 rule: no merge without a target
            mergeBtn.disabled = !select.value;
        });
        for (const btn of el.querySelectorAll("button[data-act]")) {
            btn.addEventListener("click", () =>
                void this.submit(cluster.cluster_id, (btn as HTMLButtonElement).dataset.act as
                    | "approved"
                    | "rejected"
                    | "merged", select.value || undefined),
            );
        }
        return el;
    }

    private badgeCard(cluster: Cluster): HTMLElement {
        const el = document.createElement("div");
        el.className = "cluster-card";
        const merged =
            cluster.status === "merged" && cluster.merged_into
                ? ` → ${cluster.merged_into}`
                : "";
        el.innerHTML = `
          <header><strong>${cluster.cluster_id}</strong>
            <span class="badge ${cluster.status}">${cluster.status}${merged}</span></header>
          <p class="members">${cluster.members.join(", ")}</p>`;
        return el;
    }

    private async submit(
        clusterId: string,
        status: "approved" | "rejected" | "merged",
        mergeInto?: string,
    ): Promise<void> {
        this.state.set(stagePending(this.state.get(), { clusterId, status, mergeInto }));
        try {
            const confirmed = await this.api.decide(clusterId, {
                status,
                merge_into: mergeInto ?? null,
            });
            // only the server's answer mutates what we display
            this.clusters = applyServerCluster(this.clusters, confirmed);
            this.showInfo(`${clusterId} ${confirmed.status}`);
            this.render();
        } catch (err) {
            if (err instanceof ApiError && err.status === 409) {
                this.showInfo(`${clusterId} already decided — refreshing`);
                await this.refresh();
            } else {
                this.showError(`decision failed: ${String(err)}`);
            }
        } finally {
            this.state.set(clearPending(this.state.get(), clusterId));
        }
    }
}
