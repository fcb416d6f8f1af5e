// Lead search: industry x role query with live min_prob filtering.

import { ApiClient } from "./api.js";
import { sortLeads } from "./state.js";
import { CompanyDetail, Lead } from "./types.js";

export class LeadsView {
    private table!: HTMLElement;
    private detail!: HTMLElement;
    private hint!: HTMLElement;
    private industrySelect!: HTMLSelectElement;
    private roleSelect!: HTMLSelectElement;
    private minProb!: HTMLInputElement;

    constructor(
        private api: ApiClient,
        private showError: (message: string) => void,
    ) {}

    mount(root: HTMLElement): void {
        root.innerHTML = `
          <form class="lead-form">
            <label>industries
              <select multiple size="5" name="industries" aria-label="industries"></select>
            </label>
            <label>roles
              <select multiple size="5" name="roles" aria-label="roles"></select>
            </label>
            <label>min probability
              <input type="number" name="min_prob" min="0" max="1" step="0.05" value="0.5">
            </label>
            <button type="submit">search</button>
            <span class="hint" aria-live="polite"></span>
          </form>
          <div class="lead-results"></div>
          <aside class="lead-detail" aria-live="polite"></aside>`;
        this.table = root.querySelector(".lead-results") as HTMLElement;
        this.detail = root.querySelector(".lead-detail") as HTMLElement;
        this.hint = root.querySelector(".hint") as HTMLElement;
        this.industrySelect = root.querySelector("select[name=industries]") as HTMLSelectElement;
        this.roleSelect = root.querySelector("select[name=roles]") as HTMLSelectElement;
        this.minProb = root.querySelector("input[name=min_prob]") as HTMLInputElement;
        (root.querySelector("form") as HTMLFormElement).addEventListener("submit", (ev) => {
            ev.preventDefault();
            void this.search();
        });
        this.minProb.addEventListener("change", () => void this.search(true));
        void this.loadLabelSpaces();
    }

    private async loadLabelSpaces(): Promise<void> {
        try {
            const spaces = await this.api.labels();
            this.fill(this.industrySelect, spaces.industry);
            this.fill(this.roleSelect, spaces.role);
        } catch (err) {
            this.showError(`label spaces unavailable: ${String(err)}`);
        }
    }

    private fill(select: HTMLSelectElement, labels: string[]): void {
        select.innerHTML = labels.map((l) => `<option value="${l}">${l}</option>`).join("");
    }

    private selections(select: HTMLSelectElement): string[] {
        return Array.from(select.selectedOptions).map((o) => o.value);
    }

    private async search(fromFilterChange = false): Promise<void> {
        const industries = this.selections(this.industrySelect);
        const roles = this.selections(this.roleSelect);
        if (!industries.length && !roles.length) {
            if (!fromFilterChange) this.hint.textContent = "pick at least one industry or role";
            return; // empty query: no request per the API's 400 rule
        }
        this.hint.textContent = "";
        try {
            const resp = await this.api.leads(industries, roles, Number(this.minProb.value));
            this.render(resp.leads);
        } catch (err) {
            this.showError(`lead search failed: ${String(err)}`);
        }
    }

    private render(leads: Lead[]): void {
        const ordered = sortLeads(leads); // API order, re-asserted client-side
        if (!ordered.length) {
            this.table.innerHTML = "<p>No companies matched.</p>";
            return;
        }
        const rows = ordered
            .map(
                (l) => `
              <tr tabindex="0" data-domain="${l.domain}">
                <td>${l.domain}</td>
                <td class="num">${l.score.toFixed(4)}</td>
                <td>${Object.entries(l.probs)
                    .map(([k, v]) => `${k}: ${v.toFixed(2)}`)
                    .join(", ")}</td>
              </tr>`,
            )
            .join("");
        this.table.innerHTML = `
          <table class="leads">
            <thead><tr><th>company</th><th>rank score</th><th>matched probabilities</th></tr></thead>
            <tbody>${rows}</tbody>
          </table>`;
        for (const tr of this.table.querySelectorAll("tr[data-domain]")) {
            const open = () => void this.openDetail((tr as HTMLElement).dataset.domain as string);
            tr.addEventListener("click", open);
            tr.addEventListener("keydown", (ev) => {
                if ((ev as KeyboardEvent).key === "Enter") open();
            });
        }
    }

    private async openDetail(domain: string): Promise<void> {
        let detail: CompanyDetail;
        try {
            detail = await this.api.company(domain);
        } catch (err) {
            this.showError(`company detail unavailable: ${String(err)}`);
            return;
        }
        const predictions = Object.entries(detail.predictions)
            .map(([facet, probs]) => {
                const top = Object.entries(probs)
                    .sort((a, b) => b[1] - a[1])
                    .slice(0, 5)
                    .map(([label, p]) => `<li>${label}: ${p.toFixed(3)}</li>`)
                    .join("");
                return `<h4>${facet}</h4><ul>${top}</ul>`;
            })
            .join("");
        const labels = Object.entries(detail.labels)
            .map(([facet, ls]) => `<li>${facet}: ${ls.join(", ")}</li>`)
            .join("");
        this.detail.innerHTML = `
          <h3>${detail.domain}</h3>
          <h4>pages</h4>
          <ul>${detail.pages.map((p) => `<li>${p}</li>`).join("") || "<li>none stored</li>"}</ul>
          ${labels ? `<h4>labels</h4><ul>${labels}</ul>` : ""}
          ${predictions || "<p>no cached predictions</p>"}`;
    }
}
