import type {
  CampaignRequest,
  CampaignView,
  ConvergenceView,
  ParetoPoint,
  TrialView,
} from "./types";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body);
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class CampaignApi {
  constructor(private base = "") {}

  createCampaign(body: CampaignRequest): Promise<{ id: string }> {
    return request(`${this.base}/api/campaigns`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getCampaign(id: string): Promise<CampaignView> {
    return request(`${this.base}/api/campaigns/${id}`);
  }

  requestSuggestions(id: string, count?: number): Promise<{ trials: TrialView[]; status: string }> {
    const query = count ? `?count=${count}` : "";
    return request(`${this.base}/api/campaigns/${id}/suggestions${query}`, {
      method: "POST",
    });
  }

  postObservation(id: string, trialId: string, responses: number[]): Promise<CampaignView> {
    return request(`${this.base}/api/campaigns/${id}/trials/${trialId}/observation`, {
      method: "POST",
      body: JSON.stringify({ responses }),
    });
  }

  getPareto(id: string): Promise<{ points: ParetoPoint[] }> {
    return request(`${this.base}/api/campaigns/${id}/pareto`);
  }

  getConvergence(id: string): Promise<ConvergenceView> {
    return request(`${this.base}/api/campaigns/${id}/convergence`);
  }
}
