/** Wire types of the task service JSON API. */

export interface HitInstance {
  id: string;
  display_properties: Record<string, string>;
}

export interface HitDoc {
  id: string;
  property: string;
  type: string;
  instances: HitInstance[];
  candidate_properties: string[];
  assignments_required: number;
}

export interface AnswerPayload {
  hit_id: string;
  worker_id: string;
  selected_instances: string[];
  selected_properties: string[];
}

export interface Progress {
  hits_total: number;
  hits_complete: number;
  answers: number;
}
